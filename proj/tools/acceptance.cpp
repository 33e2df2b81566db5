// Acceptance checks 1-8. Prints one PASS/FAIL line per criterion; the exit
// code is nonzero when a gated criterion (1-7) fails. Criterion 8 is a
// measurement and is reported without gating.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <queue>
#include <sstream>
#include <string>

#include "focq/bench.hpp"
#include "focq/corpus.hpp"
#include "focq/covers.hpp"
#include "focq/eval.hpp"
#include "focq/parser.hpp"
#include "focq/reductions.hpp"
#include "focq/removal.hpp"

using namespace focq;

namespace {

// Tolerances and sizes.
constexpr std::size_t kCorpusSize = 200;
constexpr std::size_t kCorpusMaxN = 60;
constexpr double kCorpusSecondsLimit = 600.0;
constexpr std::size_t kCorpusThreshold = 8;
constexpr int kPatternStructures = 50;
constexpr int kFormulaInstances = 500;
constexpr int kGroundTermInstances = 120;
constexpr int kUnaryTermInstances = 100;
constexpr int kRandomReductionGraphs = 50;
constexpr std::size_t kCoverMaxN = 10000;
constexpr int kLocalityInstances = 100;
constexpr double kLocalSlopeMax = 1.3;
constexpr double kNaiveSlopeMin = 1.8;
constexpr std::size_t kNaiveCap = 10000;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

const PredicateRegistry& reg() {
  static PredicateRegistry r = PredicateRegistry::with_builtins();
  return r;
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Distances in the Gaifman graph (-1 = unreachable), by BFS from every
// element over the raw tuples.
std::vector<std::vector<int>> all_distances(const Structure& a) {
  std::size_t n = a.size();
  std::vector<std::vector<Elem>> adj(n);
  for (std::size_t r = 0; r < a.signature().size(); ++r)
    for (const auto& t : a.relation_at(r).tuples())
      for (Elem u : t)
        for (Elem v : t)
          if (u != v) adj[u].push_back(v);
  std::vector<std::vector<int>> d(n, std::vector<int>(n, -1));
  for (Elem s = 0; s < n; ++s) {
    std::queue<Elem> q;
    q.push(s);
    d[s][s] = 0;
    while (!q.empty()) {
      Elem v = q.front();
      q.pop();
      for (Elem w : adj[v])
        if (d[s][w] < 0) {
          d[s][w] = d[s][v] + 1;
          q.push(w);
        }
    }
  }
  return d;
}

std::vector<int> bfs(const std::vector<std::vector<Elem>>& adj, Elem s, const std::vector<char>* allowed = nullptr) {
  std::vector<int> d(adj.size(), -1);
  std::queue<Elem> q;
  q.push(s);
  d[s] = 0;
  while (!q.empty()) {
    Elem v = q.front();
    q.pop();
    for (Elem w : adj[v])
      if (d[w] < 0 && (!allowed || (*allowed)[w])) {
        d[w] = d[v] + 1;
        q.push(w);
      }
  }
  return d;
}

Outcome criterion1() {
  auto start = Clock::now();
  std::size_t rejected = 0;
  auto corpus = acceptance_corpus(kCorpusSize, 20240601, kCorpusMaxN, &rejected);
  LocalizedConfig cfg;
  cfg.threshold = kCorpusThreshold;
  std::size_t mismatches = 0, terms = 0, fallbacks = 0, removals = 0, cap_hits = 0;
  int depth = 0;
  for (const auto& item : corpus) {
    auto out = evaluate(item.input, item.structure, reg(), cfg);
    bool same;
    if (out.value.is_term) {
      ++terms;
      same = out.value.value == value(item.structure, reg(), item.input);
    } else {
      same = out.value.truth == holds(item.structure, reg(), item.input);
    }
    if (!same) {
      ++mismatches;
      std::cerr << "criterion 1 mismatch on " << item.family << ": " << render(item.input) << "\n";
    }
    fallbacks += out.report.fallbacks;
    cap_hits += out.report.cap_hits;
    removals += out.report.removals;
    depth = std::max(depth, out.report.max_depth);
  }
  double t = seconds_since(start);
  std::ostringstream os;
  os << corpus.size() << " inputs (" << terms << " terms), " << mismatches << " mismatches, " << rejected
     << " generated inputs rejected by the decomposition, removals " << removals << ", max recursion depth "
     << depth << ", direct at the recursion cap " << cap_hits << ", fallbacks " << fallbacks << ", " << t << " s";
  return {mismatches == 0 && corpus.size() >= kCorpusSize && t < kCorpusSecondsLimit, os.str()};
}

Outcome criterion2() {
  Rng rng(7001);
  auto ys = canonical_vars(3);
  std::size_t checks = 0, failures = 0;
  for (int s = 0; s < kPatternStructures; ++s) {
    std::size_t n = 1 + rng() % 8;
    Structure a = with_random_unary(graph_structure(n, random_edges(n, 0.3, rng)), {"P"}, 0.5, rng);
    auto d = all_distances(a);
    const auto& p = a.relation("P");
    std::int64_t r = rng() % 2;
    int thr = static_cast<int>(2 * r + 1);
    for (int k = 1; k <= 3; ++k) {
      Int total = 0, expect_total = 1;
      for (int i = 0; i < k; ++i) expect_total *= static_cast<long>(n);
      for (const auto& g : PatternGraph::all(k)) {
        // Per component: either true or P at its least vertex.
        std::map<std::vector<int>, Expr> comps;
        std::vector<int> guarded;
        for (const auto& c : g.components())
          if (rng() % 2) {
            comps[c] = mk_atom("P", {ys[c.front()]});
            guarded.push_back(c.front());
          }
        std::vector<Elem> tup(k, 0);
        Int brute = 0, brute_plain = 0;
        for (;;) {
          bool match = true;
          for (int i = 0; i < k && match; ++i)
            for (int j = i + 1; j < k && match; ++j) {
              int dij = d[tup[i]][tup[j]];
              bool close = dij >= 0 && dij <= thr;
              match = close == g.has_edge(i, j);
            }
          if (match) {
            ++brute_plain;
            bool ok = true;
            for (int v : guarded) ok = ok && p.contains(Tuple{tup[v]});
            if (ok) ++brute;
          }
          int i = k - 1;
          while (i >= 0 && ++tup[i] == n) tup[i--] = 0;
          if (i < 0) break;
        }
        Int plain = count_pattern(a, reg(), g, r, {}, std::nullopt);
        Int got = count_pattern(a, reg(), g, r, comps, std::nullopt);
        checks += 2;
        if (plain != brute_plain) ++failures;
        if (got != brute) ++failures;
        total += plain;
      }
      ++checks;
      if (total != expect_total) ++failures;
    }
  }
  std::ostringstream os;
  os << checks << " checks over " << kPatternStructures << " structures, " << failures << " failures";
  return {failures == 0, os.str()};
}

Assignment shifted(const Assignment& beta, Elem d, const VarSet& skip) {
  Assignment out;
  for (auto [x, e] : beta)
    if (!skip.count(x)) out[x] = e > d ? e - 1 : e;
  return out;
}

void close_outside(Expr& body, const std::vector<Var>& pool, const std::vector<Var>& keep) {
  for (Var v : pool)
    if (std::find(keep.begin(), keep.end(), v) == keep.end() && body->has_free(v)) body = mk_exists(v, body);
}

Outcome criterion3() {
  Rng rng(7003);
  std::vector<Var> pool{Var("x1"), Var("x2"), Var("x3")};
  int formula_fail = 0, ground_fail = 0, unary_fail = 0, unary_checks = 0;
  for (int i = 0; i < kFormulaInstances; ++i) {
    std::size_t n = 2 + rng() % 9;
    Structure a = random_digraph(rng, n);
    int r = 1 + static_cast<int>(rng() % 5);
    Expr phi = random_fo_formula(rng, 2, 1 + static_cast<int>(rng() % 7), r, pool);
    Elem d = static_cast<Elem>(rng() % n);
    Assignment beta;
    VarSet V;
    for (Var x : pool) {
      Elem e = rng() % 3 == 0 ? d : static_cast<Elem>(rng() % n);
      beta[x] = e;
      if (e == d) V.insert(x);
    }
    auto rs = remove(a, d, r);
    if (holds(a, reg(), phi, beta) != holds(rs.structure, reg(), removal_formula(phi, V, r), shifted(beta, d, V)))
      ++formula_fail;
  }
  for (int i = 0; i < kGroundTermInstances; ++i) {
    std::size_t n = 2 + rng() % 7;
    Structure a = random_digraph(rng, n);
    int r = 1 + static_cast<int>(rng() % 3);
    std::size_t k = 1 + rng() % 3;
    std::vector<Var> ys(pool.begin(), pool.begin() + k);
    BasicTerm g{false, Var(), ys, random_fo_formula(rng, 1, 1 + rng() % 5, r, pool)};
    close_outside(g.body, pool, ys);
    Elem d = static_cast<Elem>(rng() % n);
    auto rs = remove(a, d, r);
    Int sum = 0;
    for (const auto& t : removal_ground_term(g, r)) sum += value(rs.structure, reg(), t.to_expr());
    if (sum != value(a, reg(), g.to_expr())) ++ground_fail;
  }
  for (int i = 0; i < kUnaryTermInstances; ++i) {
    std::size_t n = 2 + rng() % 6;
    Structure a = random_digraph(rng, n);
    int r = 1 + static_cast<int>(rng() % 3);
    std::size_t k = 1 + rng() % 2;
    Var x = pool[0];
    std::vector<Var> ys(pool.begin() + 1, pool.begin() + 1 + k);
    BasicTerm u{true, x, ys, random_fo_formula(rng, 1, 1 + rng() % 5, r, pool)};
    auto keep = ys;
    keep.push_back(x);
    close_outside(u.body, pool, keep);
    Elem d = static_cast<Elem>(rng() % n);
    auto rs = remove(a, d, r);
    auto parts = removal_unary_term(u, r);
    for (Elem e = 0; e < n; ++e) {
      Int expect = value(a, reg(), u.to_expr(), {{x, e}});
      Int got = 0;
      if (e == d)
        for (const auto& g : parts.grounds) got += value(rs.structure, reg(), g.to_expr());
      else
        for (const auto& t : parts.unaries) got += value(rs.structure, reg(), t.to_expr(), {{x, e > d ? e - 1 : e}});
      ++unary_checks;
      if (got != expect) ++unary_fail;
    }
  }
  std::ostringstream os;
  os << "formula contract " << kFormulaInstances << " instances, " << formula_fail << " failures; ground terms "
     << kGroundTermInstances << " instances, " << ground_fail << " failures; unary terms " << kUnaryTermInstances
     << " instances (" << unary_checks << " elements), " << unary_fail << " failures";
  return {formula_fail == 0 && ground_fail == 0 && unary_fail == 0, os.str()};
}

Outcome criterion4() {
  Signature g{{"E", 2}};
  std::vector<std::string> texts = {
      "exists x. exists y. E(x,y)",
      "exists x. exists y. exists z. (E(x,y) & E(y,z) & E(x,z))",
      "exists x. forall y. !E(x,y)",
      "exists x. forall y. (x = y | E(x,y))",
      "exists x. exists y. exists z. (!x = z & E(x,y) & E(y,z))",
  };
  std::vector<Expr> pool, tree_hat, string_hat;
  for (const auto& t : texts) {
    pool.push_back(parse_expr(t, g, reg()));
    tree_hat.push_back(rewrite_tree_formula(pool.back()));
    string_hat.push_back(rewrite_string_formula(pool.back()));
  }
  std::size_t graphs = 0, failures = 0;
  auto check = [&](std::size_t n, const std::vector<Edge>& es) {
    ++graphs;
    Structure gs = graph_structure(n, es);
    auto t = encode_tree(n, es);
    auto s = encode_string(n, es);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      bool expect = holds(gs, reg(), pool[i]);
      if (holds(t.tree, reg(), tree_hat[i]) != expect) ++failures;
      if (holds(s.structure, reg(), string_hat[i]) != expect) ++failures;
    }
  };
  for (std::size_t n = 1; n <= 4; ++n) {
    std::vector<Edge> pairs;
    for (Elem i = 0; i < n; ++i)
      for (Elem j = i + 1; j < n; ++j) pairs.push_back({i, j});
    for (std::size_t m = 0; m < (std::size_t(1) << pairs.size()); ++m) {
      std::vector<Edge> es;
      for (std::size_t i = 0; i < pairs.size(); ++i)
        if (m >> i & 1) es.push_back(pairs[i]);
      check(n, es);
    }
  }
  Rng rng(7004);
  for (int i = 0; i < kRandomReductionGraphs; ++i) {
    std::size_t n = 1 + rng() % 8;
    check(n, random_edges(n, 0.35, rng));
  }
  // K_2: vertex count and height measured by BFS from the root.
  auto k2 = encode_tree(2, {{0, 1}});
  auto d = all_distances(k2.tree);
  Elem root = 0;
  for (Elem e = 0; e < k2.tree.size(); ++e)
    if (k2.roles[e] == 'r') root = e;
  int height = *std::max_element(d[root].begin(), d[root].end());
  bool unreachable = std::count(d[root].begin(), d[root].end(), -1) > 0;
  std::size_t tree_edges = k2.tree.relation("E").size() / 2;
  bool k2_ok = k2.tree.size() == 20 && height == 3 && !unreachable && tree_edges == 19;
  std::ostringstream os;
  os << graphs << " graphs x " << pool.size() << " sentences x 2 encodings, " << failures
     << " failures; K_2 tree " << k2.tree.size() << " vertices, height " << height;
  return {failures == 0 && k2_ok, os.str()};
}

Outcome criterion5() {
  std::size_t covers = 0, failures = 0;
  std::ostringstream hist;
  Rng rng(7005);
  for (std::size_t n : {std::size_t(100), std::size_t(1000), kCoverMaxN})
    for (auto fam : {Family::RandomTree, Family::Grid})
      for (std::int64_t r : {1, 2}) {
        Structure a = family_graph(fam, n, rng);
        Cover c = build_cover(a, r);
        CoverReport rep = validate_cover(a, c);
        ++covers;
        bool ok = rep.ok;
        // Independent check of the cover conditions.
        Graph adj = gaifman_adjacency(a);
        std::size_t size = a.size();
        std::vector<std::size_t> degree(size, 0);
        std::size_t total = 0;
        for (std::size_t i = 0; i < c.clusters.size(); ++i) {
          std::vector<char> in(size, 0);
          for (Elem e : c.clusters[i]) in[e] = 1, ++degree[e];
          total += c.clusters[i].size();
          if (!in[c.centre[i]]) {
            ok = false;
            continue;
          }
          auto dc = bfs(adj, c.centre[i], &in);
          for (Elem e : c.clusters[i])
            if (dc[e] < 0 || dc[e] > 2 * r) ok = false;
          for (Elem m : c.members[i]) {
            if (c.cluster_of[m] != i) ok = false;
            auto dm = bfs(adj, m);
            for (Elem e = 0; e < size; ++e)
              if (dm[e] >= 0 && dm[e] <= r && !in[e]) ok = false;
          }
        }
        std::size_t assigned = 0;
        for (const auto& m : c.members) assigned += m.size();
        if (assigned != size) ok = false;
        std::size_t delta = *std::max_element(degree.begin(), degree.end());
        if (total > size * delta || total != rep.total_size || delta != rep.max_degree) ok = false;
        if (!ok) ++failures;
        if (a.size() >= kCoverMaxN) {
          hist << " " << family_name(fam) << " r=" << r << " {";
          bool first = true;
          for (auto [deg, cnt] : rep.degree_histogram) {
            hist << (first ? "" : ", ") << deg << ":" << cnt;
            first = false;
          }
          hist << "}";
        }
      }
  std::ostringstream os;
  os << covers << " covers up to n=" << kCoverMaxN << ", " << failures << " failures; degree histograms at n="
     << kCoverMaxN << ":" << hist.str();
  return {failures == 0, os.str()};
}

Graph graph_from_mask(std::size_t n, std::uint32_t mask) {
  Graph g(n);
  int bit = 0;
  for (Elem i = 0; i < n; ++i)
    for (Elem j = i + 1; j < n; ++j, ++bit)
      if (mask >> bit & 1) g[i].push_back(j), g[j].push_back(i);
  return g;
}

int pair_bit(std::size_t n, Elem i, Elem j) {
  if (i > j) std::swap(i, j);
  int bit = 0;
  for (Elem a = 0; a < i; ++a) bit += static_cast<int>(n - 1 - a);
  return bit + static_cast<int>(j - i - 1);
}

Outcome criterion6() {
  std::size_t failures = 0, games = 0;
  auto val = [&](const Graph& g, std::int64_t r) {
    ++games;
    auto v = solve_splitter(g, r, static_cast<int>(g.size()) + 1);
    return v.value ? *v.value : -1;
  };
  // Hand-derived values.
  int single = val(Graph(1), 1);
  int k2 = val(graph_from_mask(2, 1), 1);
  int p3 = val(graph_from_mask(3, 0b011), 1);  // K_{1,2}: edges 0-1, 0-2
  if (single != 1 || k2 != 2 || p3 != 2) ++failures;
  // values[n][r][mask]
  std::vector<std::array<std::vector<int>, 3>> values(7);
  for (std::size_t n = 1; n <= 6; ++n) {
    std::uint32_t masks = 1u << (n * (n - 1) / 2);
    for (std::int64_t r = 0; r <= 2; ++r) {
      values[n][r].resize(masks);
      for (std::uint32_t m = 0; m < masks; ++m) values[n][r][m] = val(graph_from_mask(n, m), r);
    }
  }
  std::size_t relations = 0;
  for (std::size_t n = 1; n <= 6; ++n) {
    std::uint32_t masks = 1u << (n * (n - 1) / 2);
    int pairs = static_cast<int>(n * (n - 1) / 2);
    for (std::uint32_t m = 0; m < masks; ++m)
      for (std::int64_t r = 0; r <= 2; ++r) {
        int v = values[n][r][m];
        if (v < 1) ++failures;
        // Monotone in the radius.
        if (r >= 1) {
          ++relations;
          if (values[n][r - 1][m] > v) ++failures;
        }
        if (r == 0) continue;
        // Deleting an edge or a vertex never helps Connector.
        for (int b = 0; b < pairs; ++b)
          if (m >> b & 1) {
            ++relations;
            if (values[n][r][m & ~(1u << b)] > v) ++failures;
          }
        if (n >= 2)
          for (Elem del = 0; del < n; ++del) {
            std::uint32_t sub = 0;
            for (Elem i = 0, ii = 0; i < n; ++i) {
              if (i == del) continue;
              for (Elem j = i + 1, jj = ii + 1; j < n; ++j) {
                if (j == del) continue;
                if (m >> pair_bit(n, i, j) & 1) sub |= 1u << pair_bit(n - 1, ii, jj);
                ++jj;
              }
              ++ii;
            }
            ++relations;
            if (values[n - 1][r][sub] > v) ++failures;
          }
      }
  }
  std::ostringstream os;
  os << "single vertex " << single << ", K_2 " << k2 << ", K_{1,2} " << p3 << "; " << games << " games, "
     << relations << " monotonicity and subgraph relations, " << failures << " failures";
  return {failures == 0, os.str()};
}

Outcome criterion7() {
  Rng rng(7007);
  std::vector<std::string> bodies2 = {"(E(y1,y2) & P(y2))", "exists w. (E(y1,w) & E(w,y2) & !P(w))",
                                      "(P(y1) & !exists w. (E(y2,w) & P(w)))", "!E(y1,y2)"};
  std::vector<std::string> bodies3 = {"(E(y1,y2) & E(y2,y3) & !y1 = y3)", "(P(y2) & !P(y3) & dist(y1,y3) <= 2)"};
  Signature sig{{"E", 2}, {"P", 1}};
  std::size_t instances = 0, failures = 0, anchors = 0;
  while (instances < kLocalityInstances) {
    std::size_t n = 6 + rng() % 14;
    Structure a = with_random_unary(family_graph(rng() % 2 ? Family::RandomTree : Family::MaxDegree3, n, rng),
                                    {"P"}, 0.5, rng);
    int k = rng() % 3 == 0 ? 3 : 2;
    const auto& bodies = k == 3 ? bodies3 : bodies2;
    Expr psi = parse_expr(bodies[rng() % bodies.size()], sig, reg());
    auto loc = analyze_locality(psi, canonical_vars(k));
    if (!loc.local) continue;
    std::vector<PatternGraph> conn;
    for (const auto& g : PatternGraph::all(k))
      if (g.connected()) conn.push_back(g);
    auto t = make_basic(true, k, loc.radius, conn[rng() % conn.size()], psi);
    ++instances;
    Graph adj = gaifman_adjacency(a);
    Var z("z");
    Expr te = t->to_expr(z);
    for (Elem e = 0; e < a.size(); ++e) {
      ++anchors;
      Int whole = value(a, reg(), te, {{z, e}});
      // Neighbourhood built here by BFS, anchor renamed inside it.
      auto de = bfs(adj, e);
      std::vector<Elem> ball;
      for (Elem v = 0; v < a.size(); ++v)
        if (de[v] >= 0 && de[v] <= t->reach()) ball.push_back(v);
      Structure nb = induced(a, ball);
      Elem inner = static_cast<Elem>(std::lower_bound(ball.begin(), ball.end(), e) - ball.begin());
      Int local = value(nb, reg(), te, {{z, inner}});
      Int lib = eval_basic_cl(a, reg(), *t, e, {.inside_neighbourhood = true});
      if (whole != local || whole != lib) ++failures;
    }
  }
  std::ostringstream os;
  os << instances << " instances, " << anchors << " anchors, " << failures << " failures";
  return {failures == 0, os.str()};
}

Outcome criterion8() {
  LocalizedConfig cfg;
  std::ostringstream os;
  bool pass = true;
  for (auto fam : {Family::Star, Family::Path}) {
    auto res = run_bench(fam, {1000, 10000, 100000}, 7008, cfg, kNaiveCap);
    os << res.family << ": local slope " << (res.local_slope ? std::to_string(*res.local_slope) : "n/a")
       << ", naive slope " << (res.naive_slope ? std::to_string(*res.naive_slope) : "n/a") << " (naive up to n="
       << kNaiveCap << ");";
    for (const auto& row : res.rows) {
      os << " n=" << row.n << " local " << row.local_seconds << "s";
      if (row.naive_seconds) {
        os << " naive " << *row.naive_seconds << "s";
        if (*row.naive_value != row.local_value) pass = false;
      }
    }
    os << ". ";
    if (!res.local_slope || *res.local_slope > kLocalSlopeMax) pass = false;
    if (!res.naive_slope || *res.naive_slope < kNaiveSlopeMin) pass = false;
  }
  return {pass, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  auto wanted = [&](int c) { return only.empty() || std::find(only.begin(), only.end(), c) != only.end(); };
  Outcome (*checks[])() = {criterion1, criterion2, criterion3, criterion4,
                           criterion5, criterion6, criterion7, criterion8};
  bool gated_ok = true;
  for (int c = 1; c <= 8; ++c) {
    if (!wanted(c)) continue;
    auto start = Clock::now();
    Outcome o;
    try {
      o = checks[c - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d: %s | %s | %.1f s%s\n", c, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                seconds_since(start), c == 8 ? " | reported, not gated" : "");
    std::fflush(stdout);
    if (c != 8 && !o.pass) gated_ok = false;
  }
  return gated_ok ? 0 : 1;
}
