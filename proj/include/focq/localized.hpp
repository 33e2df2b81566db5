#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "focq/decompose.hpp"

namespace focq {

struct LocalizedConfig {
  // Structures and clusters below this size are evaluated directly.
  std::size_t threshold = 32;
  // Removal levels; at the cap a structure is evaluated directly.
  int recursion_cap = 1;
  int jobs = 1;
  // Recorded in reports; the cover and the strategy do not depend on them.
  double epsilon = 0.5;
  std::vector<int> lambda;
  // Exact splitter search is used up to this many vertices.
  std::size_t exact_game_cap = 10;
};

struct LocalizedReport {
  std::map<int, std::size_t> depth_histogram;  // recursion depth -> structures handled
  std::size_t covers = 0;
  std::size_t clusters = 0;
  std::size_t removals = 0;
  std::size_t direct_evaluations = 0;
  std::size_t direct_elements = 0;  // sum of sizes of directly evaluated structures
  std::size_t largest_cluster = 0;
  std::size_t cap_hits = 0;   // structures evaluated directly at the recursion cap
  std::size_t fallbacks = 0;  // removal not applicable, evaluated directly instead
  std::map<std::string, std::size_t> fallback_reasons;
  int max_depth = 0;

  void merge(const LocalizedReport& o);
};

// Values of the unary reading of t at every element of a (the ground value
// is their sum), computed over covers with removal recursion.
std::vector<Int> localized_unary(const Structure& a, const PredicateRegistry& preds, const BasicClTerm& t,
                                 const LocalizedConfig& cfg = {}, LocalizedReport* report = nullptr);
Int localized_ground(const Structure& a, const PredicateRegistry& preds, const BasicClTerm& t,
                     const LocalizedConfig& cfg = {}, LocalizedReport* report = nullptr);

class LocalizedEngine : public ClEngine {
 public:
  explicit LocalizedEngine(const PredicateRegistry& preds, LocalizedConfig cfg = {})
      : preds_(preds), cfg_(std::move(cfg)) {}
  std::vector<Int> anchor_values(const Structure& a, const BasicClTerm& t) override;
  std::string name() const override { return "localized"; }
  const LocalizedReport& report() const { return report_; }

 private:
  const PredicateRegistry& preds_;
  LocalizedConfig cfg_;
  LocalizedReport report_;
};

// Decomposes xi (a sentence or ground term) and evaluates the result with
// the localized engine.
struct EvaluationOutcome {
  DecompositionValue value;
  DecompositionStats stats;
  LocalizedReport report;
  int decomposition_depth = 0;
};
EvaluationOutcome evaluate(const Expr& xi, const Structure& a, const PredicateRegistry& preds,
                           const LocalizedConfig& cfg = {}, DecomposeOptions dopt = {});

// Query with free variables: they are replaced by unary marker relations,
// the marked sentence and terms are decomposed once and evaluated with the
// localized engine for every candidate tuple.
QueryResult evaluate_query(const Query& q, const Structure& a, const PredicateRegistry& preds,
                           const LocalizedConfig& cfg = {}, LocalizedReport* report = nullptr,
                           DecomposeOptions dopt = {});

}  // namespace focq
