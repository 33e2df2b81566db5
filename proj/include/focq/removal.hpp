#pragma once

#include <string>
#include <vector>

#include "focq/expr.hpp"
#include "focq/structure.hpp"

namespace focq {

// Symbol for the projection of R onto the positions outside I (I holds
// 1-based positions where the removed element occurred).
std::string removal_symbol(const std::string& rel, const std::vector<int>& positions);
// S_i: elements at distance 1..i from the removed element.
std::string halo_symbol(int i);

// The structure obtained by deleting d: for every R and I a relation of the
// tuples of R that had d exactly at the positions I, projected away from I,
// plus S_1..S_r.
struct RemovalProjection {
  std::string rel;
  std::vector<int> positions;
  std::string symbol;
};

struct RemovalStructure {
  Signature base;
  std::vector<RemovalProjection> projections;
  Structure structure;
  Elem removed = 0;
  int r = 0;
  std::vector<Elem> parent;  // element of the removed structure -> element of the base
};

RemovalStructure remove(const Structure& a, Elem d, int r);

// Base tuples rebuilt from the removed structure (in base element indices).
std::vector<std::pair<std::string, Tuple>> restore_tuples(const RemovalStructure& rs);

// The formula over the removed structure for assignments mapping exactly
// the variables of V (among the free ones) to the removed element.
// Distance bounds must not exceed r; counting terms are rejected.
Expr removal_formula(const Expr& phi, const VarSet& V, int r);

// #ys.body (ground) or #ys.body with x free (unary).
struct BasicTerm {
  bool unary = false;
  Var x;
  std::vector<Var> ys;
  Expr body;

  Expr to_expr() const { return mk_count(ys, body); }
};

// Ground terms on the removed structure whose values sum to g's value.
std::vector<BasicTerm> removal_ground_term(const BasicTerm& g, int r);

// u[d] is the sum of the grounds; u[a] for a != d is the sum of the unaries at a.
struct UnaryRemoval {
  std::vector<BasicTerm> grounds;
  std::vector<BasicTerm> unaries;
};
UnaryRemoval removal_unary_term(const BasicTerm& u, int r);

}  // namespace focq
