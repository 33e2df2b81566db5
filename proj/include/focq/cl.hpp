#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "focq/analysis.hpp"
#include "focq/eval.hpp"
#include "focq/expr.hpp"
#include "focq/predicates.hpp"
#include "focq/structure.hpp"

namespace focq {

// y_1, ..., y_k
std::vector<Var> canonical_vars(int k);

// Conjunction of dist(y_i,y_j) <= r over edges and its negation over
// non-edges.
Expr delta_formula(const PatternGraph& g, std::uint32_t r, const std::vector<Var>& ys);
Expr delta_formula(const PatternGraph& g, std::uint32_t r);

// #(y_1..y_k).(psi & delta_{G,2r+1}) (ground) or #(y_2..y_k).(...) with
// y_1 free (unary). psi is stated over the canonical variables. Width 0
// is a ground term whose body is a propositional sentence.
struct BasicClTerm {
  bool unary = false;
  int k = 1;
  std::int64_t r = 0;
  PatternGraph g;
  Expr psi;
  std::string key;

  std::int64_t pattern_radius() const { return 2 * r + 1; }
  // r + (k-1)(2r+1): every counted tuple lies in this ball around y_1.
  std::int64_t reach() const { return r + (k - 1) * (2 * r + 1); }
  // The term as an expression; the free variable of a unary term is `z`.
  Expr to_expr(Var z) const;
  Expr to_expr() const;
};
using BasicClTermPtr = std::shared_ptr<const BasicClTerm>;

// Validates connectivity of G and r-locality of psi around y_1..y_k.
BasicClTermPtr make_basic(bool unary, int k, std::int64_t r, PatternGraph g, Expr psi,
                          LocalityOptions opt = {});

struct Monomial {
  Int coef;
  std::vector<std::size_t> factors;  // sorted indices into basics()
};

// Integer polynomial over basic cl-terms.
class ClPolynomial {
 public:
  ClPolynomial() = default;
  static ClPolynomial constant(Int v);
  static ClPolynomial basic(BasicClTermPtr t);

  const std::vector<BasicClTermPtr>& basics() const { return basics_; }
  const std::vector<Monomial>& monomials() const { return monos_; }
  bool is_zero() const { return monos_.empty(); }
  std::optional<Int> constant_value() const;
  bool unary() const;
  std::int64_t radius() const;
  int width() const;

  ClPolynomial operator+(const ClPolynomial& o) const;
  ClPolynomial operator-(const ClPolynomial& o) const;
  ClPolynomial operator*(const ClPolynomial& o) const;
  ClPolynomial scaled(const Int& c) const;

  // values[i] is the value of basics()[i].
  Int evaluate(const std::vector<Int>& values) const;
  Expr to_expr(Var z) const;
  std::string render(Var z) const;

 private:
  void normalize();
  std::size_t intern(const BasicClTermPtr& t);
  std::vector<BasicClTermPtr> basics_;
  std::vector<Monomial> monos_;
};

struct BasicEvalOptions {
  // Evaluate inside the induced neighbourhood of radius reach() around the
  // anchor instead of the whole structure.
  bool inside_neighbourhood = false;
  int max_arity = 2;
};

// Number of (a_2..a_k) completing `anchor` (the unary value; for a ground
// term its contribution from anchor a_1).
Int eval_basic_cl(const Structure& a, const PredicateRegistry& preds, const BasicClTerm& t,
                  Elem anchor, BasicEvalOptions opt = {});
std::vector<Int> eval_basic_cl_all(const Structure& a, const PredicateRegistry& preds,
                                   const BasicClTerm& t, BasicEvalOptions opt = {});
// Values at the listed anchors only.
std::vector<Int> eval_basic_cl_at(const Structure& a, const PredicateRegistry& preds,
                                  const BasicClTerm& t, const std::vector<Elem>& anchors,
                                  BasicEvalOptions opt = {});
Int eval_basic_cl_ground(const Structure& a, const PredicateRegistry& preds, const BasicClTerm& t,
                         BasicEvalOptions opt = {});

// Number of tuples with pattern graph (at distance 2r+1) exactly G and
// every component formula true, computed by the split-and-correct
// recursion over components. Keys of `component_psi` are the vertex sets
// of components of G; formulas use the canonical variables y_1..y_k.
Int count_pattern(const Structure& a, const PredicateRegistry& preds, const PatternGraph& g,
                  std::int64_t r, const std::map<std::vector<int>, Expr>& component_psi,
                  std::optional<Elem> anchor, BasicEvalOptions opt = {});

// Counts #(ys).theta (ground) or #(ys without ys[0]).theta with ys[0] free
// (unary) as a cl-term. theta must be local around ys.
struct ExpandOptions {
  int max_width = 4;
  int max_split_pieces = 10;
  LocalityOptions locality;
};
ClPolynomial expand_count(bool unary, const std::vector<Var>& ys, const Expr& theta,
                          ExpandOptions opt = {});

// The same for a fixed pattern graph, over canonical variables.
ClPolynomial expand_pattern(bool unary, int k, std::int64_t r, const PatternGraph& g,
                            const Expr& psi, ExpandOptions opt = {});

struct Dispatch {
  std::vector<int> J;  // 1-based indices of the true sentences
  std::vector<bool> truth;
  Expr residual;
};
// Evaluates each sentence once and simplifies phi under the outcome.
Dispatch dispatch_sentences(const Expr& phi, const std::vector<Expr>& sentences, const Structure& a,
                            const PredicateRegistry& preds);
Dispatch dispatch_sentences(const Expr& phi, const Structure& a, const PredicateRegistry& preds);

// Bounded breadth-first search reusing its marks between calls.
class LocalBfs {
 public:
  explicit LocalBfs(const Structure& a);
  // (element, distance) pairs with distance <= radius, in BFS order.
  const std::vector<std::pair<Elem, std::uint32_t>>& run(Elem src, std::uint32_t radius);
  const std::vector<std::pair<Elem, std::uint32_t>>& run(std::span<const Elem> srcs, std::uint32_t radius);

 private:
  const Structure& a_;
  std::vector<std::uint32_t> mark_;
  std::uint32_t stamp_ = 0;
  std::vector<std::pair<Elem, std::uint32_t>> out_;
};

}  // namespace focq
