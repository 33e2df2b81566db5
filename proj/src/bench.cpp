#include "focq/bench.hpp"

#include <chrono>
#include <cmath>

namespace focq {

BasicClTermPtr bench_term() {
  auto ys = canonical_vars(2);
  PatternGraph edge(2);
  edge.add_edge(0, 1);
  return make_basic(false, 2, 1, edge, mk_and(mk_atom("P", {ys[0]}), mk_atom("Q", {ys[1]})));
}

std::optional<double> loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i)
    if (xs[i] > 0 && ys[i] > 0) pts.push_back({std::log(xs[i]), std::log(ys[i])});
  if (pts.size() < 2) return std::nullopt;
  double mx = 0, my = 0;
  for (auto [x, y] : pts) mx += x, my += y;
  mx /= pts.size();
  my /= pts.size();
  double sxy = 0, sxx = 0;
  for (auto [x, y] : pts) sxy += (x - mx) * (y - my), sxx += (x - mx) * (x - mx);
  if (sxx == 0) return std::nullopt;
  return sxy / sxx;
}

BenchResult run_bench(Family family, const std::vector<std::size_t>& sizes, std::uint64_t seed,
                      const LocalizedConfig& cfg, std::size_t naive_cap) {
  using clock = std::chrono::steady_clock;
  auto secs = [](clock::time_point a) { return std::chrono::duration<double>(clock::now() - a).count(); };
  auto t = bench_term();
  auto preds = PredicateRegistry::with_builtins();
  BenchResult res{family_name(family), render(t->to_expr()), naive_cap, {}, {}, {}};
  std::vector<double> ns, lt, nns, nt;
  for (std::size_t n : sizes) {
    Rng rng(seed + n);
    Structure a = with_random_unary(family_graph(family, n, rng), {"P", "Q"}, 0.5, rng);
    BenchRow row;
    row.n = a.size();
    auto start = clock::now();
    row.local_value = localized_ground(a, preds, *t, cfg, &row.report);
    row.local_seconds = secs(start);
    ns.push_back(double(row.n));
    lt.push_back(row.local_seconds);
    if (row.n <= naive_cap) {
      start = clock::now();
      row.naive_value = value(a, preds, t->to_expr());
      row.naive_seconds = secs(start);
      nns.push_back(double(row.n));
      nt.push_back(*row.naive_seconds);
    }
    res.rows.push_back(std::move(row));
  }
  res.local_slope = loglog_slope(ns, lt);
  res.naive_slope = loglog_slope(nns, nt);
  return res;
}

}  // namespace focq
