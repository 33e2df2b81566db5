#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "focq/core.hpp"

namespace focq {

// Interned variable name. Equality is by identity; ordering is by name so
// that sets of variables print deterministically.
class Var {
 public:
  Var() = default;
  explicit Var(std::string_view name);

  const std::string& name() const;
  std::uint32_t id() const { return id_; }
  bool valid() const { return id_ != kInvalid; }
  static std::uint32_t table_size();

  friend bool operator==(Var a, Var b) { return a.id_ == b.id_; }
  friend bool operator!=(Var a, Var b) { return a.id_ != b.id_; }
  friend bool operator<(Var a, Var b) { return a.name() < b.name(); }

 private:
  static constexpr std::uint32_t kInvalid = 0xffffffffu;
  std::uint32_t id_ = kInvalid;
};

using VarSet = std::set<Var>;

enum class Kind : std::uint8_t {
  True, False, Eq, Atom, Dist, Not, Or, Exists, Pred, Count, Const, Add, Mul
};

class Node;
using Expr = std::shared_ptr<const Node>;

class Node {
 public:
  Kind kind = Kind::True;
  std::string name;         // relation (Atom) or predicate (Pred)
  std::vector<Var> vars;    // Eq/Dist: 2, Atom: arguments, Exists: 1, Count: bound tuple
  std::vector<Expr> kids;   // sub-formulas / sub-terms
  Int value;                // Const
  std::uint32_t bound = 0;  // Dist

  // Derived at construction.
  std::vector<Var> free;    // sorted by id
  int depth = 0;            // #-depth
  bool binder = false;      // contains Exists or Count

  bool is_term() const { return kind == Kind::Count || kind == Kind::Const || kind == Kind::Add || kind == Kind::Mul; }
  bool is_formula() const { return !is_term(); }
  bool has_free(Var v) const;
};

// Raw constructors: build exactly the requested node.
Expr mk_true();
Expr mk_false();
Expr mk_eq(Var a, Var b);
Expr mk_atom(std::string rel, std::vector<Var> args);
Expr mk_dist(Var a, Var b, std::uint32_t bound);
Expr mk_not(Expr f);
Expr mk_or(Expr a, Expr b);
Expr mk_exists(Var v, Expr f);
Expr mk_pred(std::string pred, std::vector<Expr> terms);
Expr mk_count(std::vector<Var> vars, Expr f);
Expr mk_const(Int v);
Expr mk_add(Expr a, Expr b);
Expr mk_mul(Expr a, Expr b);

// Sugar, desugared to the core exactly as the parser does.
Expr mk_and(Expr a, Expr b);
Expr mk_forall(Var v, Expr f);
Expr mk_implies(Expr a, Expr b);
Expr mk_geq1(Expr t);

// Simplifying builders: fold true/false and remove double negation.
Expr negate(Expr f);
Expr conj(Expr a, Expr b);
Expr disj(Expr a, Expr b);
Expr conj_all(const std::vector<Expr>& fs);
Expr disj_all(const std::vector<Expr>& fs);
Expr exists_all(const std::vector<Var>& vs, Expr f);
Expr add_terms(Expr a, Expr b);
Expr mul_terms(Expr a, Expr b);

// Recognizers for the desugared connectives.
bool is_and(const Expr& f);
bool is_true(const Expr& f);
bool is_false(const Expr& f);
// Flattened conjuncts (of a negated disjunction) and disjuncts.
std::vector<Expr> conjuncts(const Expr& f);
std::vector<Expr> disjuncts(const Expr& f);

// Static analyses.
VarSet free_vars(const Expr& e);
int count_depth(const Expr& e);
std::size_t size(const Expr& e);
int quantifier_rank(const Expr& e);
bool structurally_equal(const Expr& a, const Expr& b);
void collect_relations(const Expr& e, std::map<std::string, int>& out);

struct RenderOptions {
  bool sugar = true;
};
std::string render(const Expr& e, RenderOptions opt = {});

// Constant folding of true/false plus trivial arithmetic; preserves
// semantics over non-empty universes.
Expr simplify(const Expr& e);

// Replace free occurrences of variables. The caller guarantees that no
// replacement variable gets captured (see rename_bound).
Expr substitute(const Expr& e, const std::map<Var, Var>& sub);
// Rename every bound variable occurring in `avoid` to a fresh name.
Expr rename_bound(const Expr& e, const VarSet& avoid);
// Rename all bound variables to w_1, w_2, ... in traversal order.
Expr normalize_bound(const Expr& e);

// Replace every subformula structurally equal to one of `from` by the
// corresponding entry of `to`.
Expr replace_subformulas(const Expr& e, const std::vector<Expr>& from, const std::vector<Expr>& to);

// Fresh variable not occurring anywhere in the given set, named prefix<N>.
Var fresh_var(const std::string& prefix, const VarSet& avoid);

struct Query {
  std::vector<Var> out_vars;
  std::vector<Expr> out_terms;
  Expr body;
};

void validate_query(const Query& q);
std::string render(const Query& q, RenderOptions opt = {});

}  // namespace focq

template <>
struct std::hash<focq::Var> {
  std::size_t operator()(focq::Var v) const noexcept { return v.id(); }
};
