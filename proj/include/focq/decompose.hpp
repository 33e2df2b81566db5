#pragma once

#include <string>
#include <vector>

#include "focq/cl.hpp"

namespace focq {

// Fresh relation symbol of arity 0 or 1 defined by P(t_1..t_m) over
// cl-terms. A unary symbol's terms have the free variable z. The symbol is
// only computed when its guard (a Boolean combination of 0-ary symbols of
// the same layer, defined earlier) holds; otherwise it is empty.
struct LayerSymbol {
  std::string name;
  int arity = 0;
  std::string pred;
  std::vector<ClPolynomial> args;
  Expr guard;

  Expr definition() const;
};

struct DecompositionLayer {
  std::vector<LayerSymbol> symbols;
};

struct ClDecomposition {
  bool is_term = false;
  Signature base;
  std::vector<DecompositionLayer> layers;
  Expr final_formula;       // sentences: Boolean combination of 0-ary atoms
  ClPolynomial final_term;  // ground terms

  int depth() const { return static_cast<int>(layers.size()) - 1; }
  // Signature after the first i layers.
  Signature signature_at(std::size_t i) const;
  std::size_t symbol_count() const;
  std::int64_t max_radius() const;
  int max_width() const;
};

struct DecomposeOptions {
  ExpandOptions expand;
  int max_sentences = 6;
};

ClDecomposition cl_decompose(const Expr& xi, const Signature& sig, DecomposeOptions opt = {});

// Evaluates basic cl-terms on a structure.
class ClEngine {
 public:
  virtual ~ClEngine() = default;
  // Per-anchor values of the unary reading of t (the ground value is their sum).
  virtual std::vector<Int> anchor_values(const Structure& a, const BasicClTerm& t) = 0;
  virtual Int ground_value(const Structure& a, const BasicClTerm& t);
  virtual std::string name() const = 0;
};

class DirectClEngine : public ClEngine {
 public:
  explicit DirectClEngine(const PredicateRegistry& preds, BasicEvalOptions opt = {}) : preds_(preds), opt_(opt) {}
  std::vector<Int> anchor_values(const Structure& a, const BasicClTerm& t) override;
  std::string name() const override { return opt_.inside_neighbourhood ? "direct-neighbourhood" : "direct"; }

 private:
  const PredicateRegistry& preds_;
  BasicEvalOptions opt_;
};

struct DecompositionValue {
  bool is_term = false;
  bool truth = false;
  Int value;
  bool operator==(const DecompositionValue&) const = default;
};

struct DecompositionStats {
  std::size_t symbols_computed = 0;
  std::size_t symbols_skipped = 0;
  std::size_t basic_terms = 0;
};

DecompositionValue eval_decomposition(const ClDecomposition& d, const Structure& a, ClEngine& engine,
                                      const PredicateRegistry& preds, DecompositionStats* stats = nullptr);

}  // namespace focq
