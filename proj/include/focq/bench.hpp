#pragma once

#include <optional>
#include <string>
#include <vector>

#include "focq/generators.hpp"
#include "focq/localized.hpp"

namespace focq {

// The fixed benchmark term: ground width 2, radius 1, edge pattern,
// psi = P(y1) & Q(y2).
BasicClTermPtr bench_term();

struct BenchRow {
  std::size_t n = 0;
  double local_seconds = 0;
  Int local_value;
  std::optional<double> naive_seconds;  // absent above the naive size cap
  std::optional<Int> naive_value;
  LocalizedReport report;
};

struct BenchResult {
  std::string family;
  std::string term;
  std::size_t naive_cap = 0;
  std::vector<BenchRow> rows;
  std::optional<double> local_slope;
  std::optional<double> naive_slope;
};

// Least-squares slope of log(y) against log(x).
std::optional<double> loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys);

// Structures are the family graph with random P and Q (probability 1/2).
// Naive counting runs the reference evaluator on sizes up to naive_cap.
BenchResult run_bench(Family family, const std::vector<std::size_t>& sizes, std::uint64_t seed,
                      const LocalizedConfig& cfg, std::size_t naive_cap);

}  // namespace focq
