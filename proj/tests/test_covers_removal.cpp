#include "doctest.h"

#include <functional>
#include <queue>
#include <set>

#include "focq/analysis.hpp"
#include "focq/covers.hpp"
#include "focq/eval.hpp"
#include "focq/generators.hpp"
#include "focq/removal.hpp"

using namespace focq;

namespace {

const PredicateRegistry& reg() {
  static PredicateRegistry r = PredicateRegistry::with_builtins();
  return r;
}

std::vector<std::vector<int>> bfs_all(const Structure& a) {
  std::size_t n = a.size();
  std::vector<std::vector<Elem>> adj(n);
  for (std::size_t ri = 0; ri < a.signature().size(); ++ri)
    for (const auto& t : a.relation_at(ri).tuples())
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

Graph graph_of(std::size_t n, const std::vector<Edge>& edges) {
  Graph g(n);
  for (auto [u, v] : edges) {
    g[u].push_back(v);
    g[v].push_back(u);
  }
  return g;
}

// Game value by plain recursion over explicit vertex sets.
int naive_game(const Graph& g, std::set<Elem> alive, int r) {
  if (alive.empty()) return 0;
  int worst = 0;
  for (Elem a : alive) {
    std::set<Elem> ball{a};
    std::vector<Elem> frontier{a};
    for (int d = 0; d < r; ++d) {
      std::vector<Elem> next;
      for (Elem v : frontier)
        for (Elem w : g[v])
          if (alive.count(w) && ball.insert(w).second) next.push_back(w);
      frontier = next;
    }
    int best = 1 << 20;
    for (Elem b : ball) {
      auto rest = ball;
      rest.erase(b);
      best = std::min(best, 1 + naive_game(g, rest, r));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

Structure digraph(std::size_t n, const std::vector<std::pair<Elem, Elem>>& arcs) {
  return graph_structure(n, arcs, true);
}

// Random first-order formula without counting, quantifier rank <= rank.
Expr random_fo(Rng& rng, int rank, int size, int r, const std::vector<Var>& pool) {
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  auto v = [&] { return pool[pick(pool.size())]; };
  if (size <= 1) {
    switch (pick(5)) {
      case 0:
        return mk_atom("E", {v(), v()});
      case 1:
        return mk_atom("P", {v()});
      case 2:
        return mk_eq(v(), v());
      case 3:
        return mk_dist(v(), v(), static_cast<std::uint32_t>(pick(r + 1)));
      default:
        return mk_atom("E", {v(), v()});
    }
  }
  std::size_t c = pick(rank > 0 ? 4 : 3);
  if (c == 0) return mk_not(random_fo(rng, rank, size - 1, r, pool));
  if (c == 1 || c == 2) {
    int left = 1 + static_cast<int>(pick(size - 1));
    auto a = random_fo(rng, rank, left, r, pool);
    auto b = random_fo(rng, rank, size - left, r, pool);
    return c == 1 ? mk_or(a, b) : mk_and(a, b);
  }
  return mk_exists(v(), random_fo(rng, rank - 1, size - 1, r, pool));
}

Assignment shifted(const Assignment& beta, Elem d, const VarSet& skip) {
  Assignment out;
  for (auto [x, e] : beta)
    if (!skip.count(x)) out[x] = e > d ? e - 1 : e;
  return out;
}

Structure random_digraph(Rng& rng, std::size_t n) {
  std::vector<std::pair<Elem, Elem>> arcs;
  for (Elem i = 0; i < n; ++i)
    for (Elem j = 0; j < n; ++j)
      if (rng() % 100 < 22) arcs.push_back({i, j});
  return with_random_unary(digraph(n, arcs), {"P"}, 0.4, rng);
}

}  // namespace

TEST_CASE("cover of a star is one cluster centred at the hub") {
  auto a = graph_structure(4, star_edges(4));
  auto c = build_cover(a, 1);
  REQUIRE(c.clusters.size() == 1);
  CHECK(c.clusters[0].size() == 4);
  CHECK(c.centre[0] == 0);
  auto rep = validate_cover(a, c);
  CHECK(rep.ok);
  CHECK(rep.max_degree == 1);
}

TEST_CASE("cover of P5 with r = 1") {
  auto a = graph_structure(5, path_edges(5));
  auto c = build_cover(a, 1);
  auto rep = validate_cover(a, c);
  CHECK(rep.ok);
  CHECK(rep.max_radius <= 2);
  auto d = bfs_all(a);
  for (Elem e = 0; e < 5; ++e) {
    const auto& x = c.clusters[c.cluster_of[e]];
    for (Elem w = 0; w < 5; ++w)
      if (d[e][w] >= 0 && d[e][w] <= 1) CHECK(std::binary_search(x.begin(), x.end(), w));
  }
}

TEST_CASE("cover of a single vertex") {
  auto a = graph_structure(1, {});
  for (int r : {0, 1, 5}) {
    auto c = build_cover(a, r);
    REQUIRE(c.clusters.size() == 1);
    CHECK(c.clusters[0] == std::vector<Elem>{0});
    CHECK(validate_cover(a, c).ok);
  }
}

TEST_CASE("corrupted cover is rejected") {
  auto a = graph_structure(5, path_edges(5));
  auto c = build_cover(a, 1);
  // Drop a neighbour of some member from its cluster.
  Elem e = 2;
  auto& x = c.clusters[c.cluster_of[e]];
  x.erase(std::find(x.begin(), x.end(), Elem(3)));
  auto rep = validate_cover(a, c);
  CHECK_FALSE(rep.ok);
  CHECK_FALSE(rep.violations.empty());
}

TEST_CASE("random covers are valid and sum of sizes is at most n times the degree") {
  Rng rng(7);
  for (auto fam : {Family::Path, Family::Star, Family::Grid, Family::RandomTree, Family::MaxDegree3}) {
    for (std::size_t n : {10, 37, 120}) {
      auto a = family_graph(fam, n, rng);
      for (int r : {0, 1, 2, 3}) {
        auto c = build_cover(a, r);
        auto rep = validate_cover(a, c);
        CHECK_MESSAGE(rep.ok, family_name(fam) << " n=" << n << " r=" << r);
        CHECK(rep.total_size <= a.size() * rep.max_degree);
        std::size_t hist = 0;
        for (auto [deg, cnt] : rep.degree_histogram) hist += cnt;
        CHECK(hist == a.size());
      }
    }
  }
}

TEST_CASE("splitter game small values") {
  CHECK(solve_splitter(graph_of(1, {}), 1, 5).value == 1);
  CHECK(solve_splitter(graph_of(3, star_edges(3)), 1, 5).value == 2);
  CHECK(solve_splitter(graph_of(2, path_edges(2)), 1, 5).value == 2);
  CHECK(solve_splitter(graph_of(0, {}), 1, 5).value == 0);
  // Round limit below the value: Connector survives.
  CHECK_FALSE(solve_splitter(graph_of(2, path_edges(2)), 1, 1).value.has_value());
  CHECK_THROWS_AS(solve_splitter(graph_of(20, path_edges(20)), 1, 5), InputError);
  CHECK(splitter_move(graph_of(3, star_edges(3)), 1, 1) == 0);
  CHECK(splitter_move(graph_of(2, {}), 1, 3) == 1);
}

TEST_CASE("splitter value agrees with naive search, is monotone in r and on subgraphs") {
  // Every graph on up to 5 vertices, and a sample on 6.
  Rng rng(11);
  for (std::size_t n = 1; n <= 6; ++n) {
    std::vector<Edge> all;
    for (Elem i = 0; i < n; ++i)
      for (Elem j = i + 1; j < n; ++j) all.push_back({i, j});
    std::size_t graphs = std::size_t(1) << all.size();
    for (std::size_t m = 0; m < graphs; ++m) {
      if (n == 6 && rng() % 64 != 0) continue;
      std::vector<Edge> es;
      for (std::size_t i = 0; i < all.size(); ++i)
        if (m >> i & 1) es.push_back(all[i]);
      auto g = graph_of(n, es);
      int prev = 0;
      for (int r = 0; r <= 2; ++r) {
        auto v = solve_splitter(g, r, 10);
        REQUIRE(v.value.has_value());
        CHECK(*v.value >= 1);
        CHECK(*v.value >= prev);
        prev = *v.value;
        // A winning bound stays winning for larger round limits.
        CHECK(!solve_splitter(g, r, *v.value - 1).value.has_value());
        if (n <= 4) {
          std::set<Elem> alive;
          for (Elem i = 0; i < n; ++i) alive.insert(i);
          CHECK(naive_game(g, alive, r) == *v.value);
        }
      }
    }
  }
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t n = 3 + rng() % 6;
    auto es = random_edges(n, 0.4, rng);
    auto g = graph_of(n, es);
    std::vector<Edge> sub;
    for (auto e : es)
      if (rng() % 2) sub.push_back(e);
    for (int r = 1; r <= 2; ++r)
      CHECK(*solve_splitter(graph_of(n, sub), r, 10).value <= *solve_splitter(g, r, 10).value);
  }
}

TEST_CASE("extracted strategy wins within the value") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t n = 2 + rng() % 6;
    auto g = graph_of(n, random_edges(n, 0.5, rng));
    int r = 1 + static_cast<int>(rng() % 2);
    auto v = solve_splitter(g, r, 10);
    REQUIRE(v.value.has_value());
    // Longest play against every Connector choice.
    std::function<int(std::uint32_t)> play = [&](std::uint32_t mask) -> int {
      if (!mask) return 0;
      int worst = 0;
      for (Elem a = 0; a < n; ++a) {
        if (!(mask >> a & 1)) continue;
        Elem b = v.strategy.at({mask, a});
        std::set<Elem> alive;
        for (Elem i = 0; i < n; ++i)
          if (mask >> i & 1) alive.insert(i);
        std::uint32_t ball = 1u << a;
        std::vector<Elem> frontier{a};
        for (int d = 0; d < r; ++d) {
          std::vector<Elem> next;
          for (Elem x : frontier)
            for (Elem w : g[x])
              if (alive.count(w) && !(ball >> w & 1)) {
                ball |= 1u << w;
                next.push_back(w);
              }
          frontier = next;
        }
        CHECK((ball >> b & 1));
        worst = std::max(worst, 1 + play(ball & ~(1u << b)));
      }
      return worst;
    };
    CHECK(play((1u << n) - 1) == *v.value);
  }
}

TEST_CASE("tree heuristic ends within the tree radius plus one") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t n = 20 + rng() % 40;
    auto es = random_tree_edges(n, rng);
    int r = 1 + static_cast<int>(rng() % 3);
    // Radius of the tree.
    auto dist = bfs_all(graph_structure(n, es));
    int radius = 1 << 20;
    for (Elem v = 0; v < n; ++v) radius = std::min(radius, *std::max_element(dist[v].begin(), dist[v].end()));
    // Connector plays randomly; the game graph is re-indexed each round.
    std::vector<Elem> alive(n);
    for (Elem i = 0; i < n; ++i) alive[i] = i;
    int rounds = 0;
    auto full = graph_of(n, es);
    while (!alive.empty()) {
      ++rounds;
      std::map<Elem, Elem> idx;
      for (Elem i = 0; i < alive.size(); ++i) idx[alive[i]] = i;
      Graph g(alive.size());
      for (Elem i = 0; i < alive.size(); ++i)
        for (Elem w : full[alive[i]])
          if (idx.count(w)) g[i].push_back(idx[w]);
      Elem a = static_cast<Elem>(rng() % alive.size());
      Elem b = splitter_move(g, a, r, 0);
      std::set<Elem> ball{a};
      std::vector<Elem> frontier{a};
      for (int d = 0; d < r; ++d) {
        std::vector<Elem> next;
        for (Elem x : frontier)
          for (Elem w : g[x])
            if (ball.insert(w).second) next.push_back(w);
        frontier = next;
      }
      REQUIRE(ball.count(b));
      ball.erase(b);
      std::vector<Elem> rest;
      for (Elem x : ball) rest.push_back(alive[x]);
      alive = rest;
    }
    CHECK(rounds <= radius + 1);
  }
}

TEST_CASE("removal of a vertex of a triangle") {
  auto a = graph_structure(3, cycle_edges(3));
  Elem d = 2;
  auto rs = remove(a, d, 1);
  const auto& b = rs.structure;
  CHECK(b.size() == 2);
  CHECK(b.names() == std::vector<std::string>{"v0", "v1"});
  CHECK(b.relation("E$").tuples() == std::vector<Tuple>{{0, 1}, {1, 0}});
  CHECK(b.relation("E$1").tuples() == std::vector<Tuple>{{0}, {1}});
  CHECK(b.relation("E$2").tuples() == std::vector<Tuple>{{0}, {1}});
  CHECK(b.relation("E$1_2").tuples().empty());
  CHECK(b.relation(halo_symbol(1)).tuples() == std::vector<Tuple>{{0}, {1}});
}

TEST_CASE("removal of an isolated vertex and of a loop") {
  auto a = graph_structure(4, {{0, 1}, {1, 2}});
  auto rs = remove(a, 3, 2);
  CHECK(rs.structure.relation("E$").size() == 4);
  CHECK(rs.structure.relation("E$1").tuples().empty());
  CHECK(rs.structure.relation("E$2").tuples().empty());
  CHECK(rs.structure.relation(halo_symbol(1)).tuples().empty());
  CHECK(rs.structure.relation(halo_symbol(2)).tuples().empty());

  auto loop = digraph(2, {{1, 1}, {0, 1}});
  auto rl = remove(loop, 1, 1);
  CHECK(rl.structure.relation("E$1_2").tuples() == std::vector<Tuple>{Tuple{}});
  CHECK(rl.structure.relation("E$2").tuples() == std::vector<Tuple>{{0}});
  CHECK(rl.structure.relation("E$1").tuples().empty());

  CHECK_THROWS_AS(remove(graph_structure(1, {}), 0, 1), InputError);
}

TEST_CASE("removal matches the definition and round-trips") {
  Rng rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t n = 2 + rng() % 9;
    auto a = random_digraph(rng, n);
    Elem d = static_cast<Elem>(rng() % n);
    int r = static_cast<int>(rng() % 5);
    auto rs = remove(a, d, r);
    auto dist = bfs_all(a);
    for (int i = 1; i <= r; ++i) {
      std::vector<Tuple> expect;
      for (Elem b = 0; b < n; ++b)
        if (b != d && dist[d][b] >= 1 && dist[d][b] <= i) expect.push_back({b > d ? b - 1 : b});
      CHECK(rs.structure.relation(halo_symbol(i)).tuples() == expect);
    }
    std::vector<std::pair<std::string, Tuple>> base;
    for (std::size_t ri = 0; ri < a.signature().size(); ++ri)
      for (const auto& t : a.relation_at(ri).tuples()) base.push_back({a.signature().symbols()[ri].name, t});
    std::sort(base.begin(), base.end());
    CHECK(restore_tuples(rs) == base);
  }
}

TEST_CASE("removal formula cases") {
  Var x1("x1"), x2("x2"), y("y");
  CHECK(removal_formula(mk_eq(x1, x2), {x1, x2}, 2)->kind == Kind::True);
  CHECK(removal_formula(mk_eq(x1, x2), {x1}, 2)->kind == Kind::False);
  CHECK(render(removal_formula(mk_dist(x1, x2, 2), {x1}, 2)) == render(mk_atom(halo_symbol(2), {x2})));
  CHECK(render(removal_formula(mk_atom("E", {x1, y}), {y}, 1)) == render(mk_atom("E$2", {x1})));
  CHECK(render(removal_formula(mk_atom("E", {x1, y}), {}, 1)) == render(mk_atom("E$", {x1, y})));
  CHECK(removal_formula(mk_dist(x1, x2, 0), {x2}, 1)->kind == Kind::False);
  CHECK_THROWS_AS(removal_formula(mk_dist(x1, x2, 3), {}, 2), InputError);
  CHECK_THROWS_AS(removal_formula(mk_geq1(mk_count({y}, mk_true())), {}, 2), InputError);
}

TEST_CASE("removal formula contract on random instances") {
  Rng rng(23);
  std::vector<Var> pool{Var("x1"), Var("x2"), Var("x3")};
  int checked = 0;
  for (int trial = 0; trial < 600; ++trial) {
    std::size_t n = 2 + rng() % 9;
    auto a = random_digraph(rng, n);
    int r = 1 + static_cast<int>(rng() % 5);
    auto phi = random_fo(rng, 2, 1 + static_cast<int>(rng() % 7), r, pool);
    Elem d = static_cast<Elem>(rng() % n);
    Assignment beta;
    VarSet V;
    for (Var x : pool) {
      Elem e = rng() % 3 == 0 ? d : static_cast<Elem>(rng() % n);
      beta[x] = e;
      if (e == d) V.insert(x);
    }
    auto rs = remove(a, d, r);
    auto t = removal_formula(phi, V, r);
    bool lhs = holds(a, reg(), phi, beta);
    bool rhs = holds(rs.structure, reg(), t, shifted(beta, d, V));
    CHECK_MESSAGE(lhs == rhs, render(phi) << " V-size " << V.size());
    if (q_rank_check(phi, 3, 2)) CHECK(q_rank_check(t, 3, 2));
    ++checked;
  }
  CHECK(checked >= 500);
}

TEST_CASE("removal of ground terms") {
  Var y("y"), x("x"), z("z");
  auto sum_on = [&](const RemovalStructure& rs, const std::vector<BasicTerm>& ts) {
    Int s = 0;
    for (const auto& t : ts) s += value(rs.structure, reg(), t.to_expr());
    return s;
  };
  BasicTerm all{false, Var(), {y}, mk_true()};
  auto three = graph_structure(3, {});
  CHECK(sum_on(remove(three, 1, 1), removal_ground_term(all, 1)) == 3);

  BasicTerm edges{false, Var(), {x, y}, mk_atom("E", {x, y})};
  auto tri = graph_structure(3, cycle_edges(3));
  for (Elem d = 0; d < 3; ++d) CHECK(sum_on(remove(tri, d, 1), removal_ground_term(edges, 1)) == 6);

  BasicTerm none{false, Var(), {x, y}, mk_false()};
  for (const auto& t : removal_ground_term(none, 1)) CHECK(t.body->kind == Kind::False);

  Rng rng(29);
  std::vector<Var> pool{x, y, z};
  for (int trial = 0; trial < 150; ++trial) {
    std::size_t n = 2 + rng() % 7;
    auto a = random_digraph(rng, n);
    int r = 1 + static_cast<int>(rng() % 3);
    std::size_t k = 1 + rng() % 2;
    BasicTerm g{false, Var(), {pool.begin(), pool.begin() + k}, random_fo(rng, 1, 1 + rng() % 5, r, pool)};
    // Close off variables outside the counted tuple.
    for (Var v : pool)
      if (std::find(g.ys.begin(), g.ys.end(), v) == g.ys.end() && g.body->has_free(v))
        g.body = mk_exists(v, g.body);
    Elem d = static_cast<Elem>(rng() % n);
    CHECK(value(a, reg(), g.to_expr()) == sum_on(remove(a, d, r), removal_ground_term(g, r)));
  }
}

TEST_CASE("removal of unary terms") {
  Var x("x"), z("z"), w("w");
  auto check_unary = [&](const Structure& a, const BasicTerm& u, int r) {
    for (Elem d = 0; d < a.size(); ++d) {
      auto rs = remove(a, d, r);
      auto parts = removal_unary_term(u, r);
      for (Elem e = 0; e < a.size(); ++e) {
        Int expect = value(a, reg(), u.to_expr(), {{u.x, e}});
        Int got = 0;
        if (e == d) {
          for (const auto& g : parts.grounds) got += value(rs.structure, reg(), g.to_expr());
        } else {
          for (const auto& t : parts.unaries)
            got += value(rs.structure, reg(), t.to_expr(), {{u.x, e > d ? e - 1 : e}});
        }
        CHECK_MESSAGE(expect == got, render(u.body) << " d=" << d << " a=" << e);
      }
    }
  };
  auto cyc = digraph(3, {{0, 1}, {1, 2}, {2, 0}});
  check_unary(cyc, BasicTerm{true, x, {z}, mk_atom("E", {x, z})}, 1);
  check_unary(cyc, BasicTerm{true, x, {z}, mk_eq(x, z)}, 1);
  check_unary(digraph(3, {}), BasicTerm{true, x, {z}, mk_atom("E", {x, z})}, 1);

  Rng rng(31);
  std::vector<Var> pool{x, z, w};
  for (int trial = 0; trial < 80; ++trial) {
    std::size_t n = 2 + rng() % 6;
    auto a = random_digraph(rng, n);
    int r = 1 + static_cast<int>(rng() % 3);
    std::size_t k = 1 + rng() % 2;
    BasicTerm u{true, x, {pool.begin() + 1, pool.begin() + 1 + k}, random_fo(rng, 1, 1 + rng() % 5, r, pool)};
    for (Var v : pool)
      if (v != x && std::find(u.ys.begin(), u.ys.end(), v) == u.ys.end() && u.body->has_free(v))
        u.body = mk_exists(v, u.body);
    check_unary(a, u, r);
  }
}
