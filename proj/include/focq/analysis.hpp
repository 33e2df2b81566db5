#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "focq/expr.hpp"

namespace focq {

struct Fo1cViolation {
  Expr node;
  std::vector<Var> free;
  std::string message;
};

struct Fo1cReport {
  bool ok = true;
  std::vector<Fo1cViolation> violations;
};

// Every predicate application may have at most one free variable jointly
// across its argument terms.
Fo1cReport validate_fo1c(const Expr& e);

// (4q)^(q+l)
Int f_q(int q, int l);

// Quantifier rank <= l and each distance bound under i quantifiers is at
// most (4q)^(q+l-i). Throws InputError on counting or predicate nodes.
bool q_rank_check(const Expr& phi, int q, int l);

// Pushes existential quantifiers through disjunctions and splits blocks
// into groups of conjuncts connected by shared quantified variables.
Expr miniscope(const Expr& e);

// Maximal subformulas without free variables that are quantified or
// predicate applications. Boolean structure above them is not included.
std::vector<Expr> sentence_constituents(const Expr& f);

// Position of a variable relative to the centre tuple: every value it can
// take lies within `offset` of the centre variable number `anchor`.
struct Placement {
  int anchor = 0;
  std::int64_t offset = 0;
};

struct LocalityOptions {
  // Largest relation arity of the structures the formula is evaluated on.
  // Arity three or more costs one extra unit of radius on distance atoms,
  // since an induced substructure can lose Gaifman edges at its border.
  int max_arity = 2;
};

struct LocalityReport {
  bool local = false;
  std::int64_t radius = 0;
  std::vector<Expr> sentences;
  std::string diagnostic;
};

// Syntactic locality: every quantified variable must be tied to an
// in-scope variable by a conjunct (relation atom, equality or distance
// atom) of its block. Sentence constituents are reported, not analysed.
LocalityReport analyze_locality(const Expr& psi, const std::vector<Var>& centre,
                                LocalityOptions opt = {});

// Placements for the variables of a quantifier block, given placements of
// the variables in scope. Returns false if some block variable is unguarded.
bool place_block(const std::vector<Var>& block, const Expr& body,
                 const std::map<Var, Placement>& scope, std::map<Var, Placement>& out);

// Unrolls nested existential quantifiers: returns the block variables and
// the innermost body.
std::pair<std::vector<Var>, Expr> exists_block(const Expr& f);

}  // namespace focq
