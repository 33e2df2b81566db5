#pragma once

#include <functional>
#include <map>
#include <memory>
#include <unordered_map>
#include <vector>

#include "focq/expr.hpp"
#include "focq/predicates.hpp"
#include "focq/structure.hpp"

namespace focq {

using Assignment = std::map<Var, Elem>;

// Evaluation by the inductive definition. Quantifier and counting blocks
// iterate over the whole universe, pruned by conjuncts whose variables are
// already bound. Subexpressions with at most two free variables that
// contain a binder are memoized per assignment.
class Evaluator {
 public:
  Evaluator(const Structure& a, const PredicateRegistry& preds);
  ~Evaluator();
  Evaluator(const Evaluator&) = delete;
  Evaluator& operator=(const Evaluator&) = delete;

  bool holds(const Expr& f, const Assignment& beta = {});
  Int value(const Expr& t, const Assignment& beta = {});

  // Direct slot access for callers that bind variables themselves.
  void bind(Var v, Elem e);
  void unbind(Var v);
  bool holds_bound(const Expr& f);
  Int value_bound(const Expr& t);

  // Calls `visit` for each tuple over `vars` (lexicographic order) that
  // satisfies `f` under the current bindings; stops when visit returns true.
  void enumerate(const std::vector<Var>& vars, const Expr& f,
                 const std::function<bool(const Tuple&)>& visit);

  const Structure& structure() const { return a_; }
  std::uint64_t memo_hits() const;

 private:
  struct Impl;
  const Structure& a_;
  std::unique_ptr<Impl> impl_;
};

bool holds(const Structure& a, const PredicateRegistry& preds, const Expr& f,
           const Assignment& beta = {});
Int value(const Structure& a, const PredicateRegistry& preds, const Expr& t,
          const Assignment& beta = {});

struct QueryRow {
  std::vector<Elem> elems;
  std::vector<Int> values;
  bool operator==(const QueryRow&) const = default;
};

struct QueryResult {
  std::vector<QueryRow> rows;
  bool operator==(const QueryResult&) const = default;
};

QueryResult eval_query(const Query& q, const Structure& a, const PredicateRegistry& preds);

// Replaces the free variables x1..xk by fresh unary relation symbols.
struct FreeVarElimination {
  std::vector<Var> vars;
  std::vector<std::string> symbols;
  Expr sentence;
  std::vector<Expr> terms;
};

FreeVarElimination eliminate_free_vars(const Expr& phi, const std::vector<Expr>& terms,
                                       const std::vector<Var>& xs);
// The expansion with X_i = {a_i}.
Structure expand_with_tuple(const Structure& a, const FreeVarElimination& fe, const Tuple& tuple);

}  // namespace focq
