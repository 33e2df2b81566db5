#include "doctest.h"

#include <queue>

#include "focq/cl.hpp"
#include "focq/decompose.hpp"
#include "focq/eval.hpp"
#include "focq/generators.hpp"
#include "focq/parser.hpp"

using namespace focq;

namespace {

const PredicateRegistry& reg() {
  static PredicateRegistry r = PredicateRegistry::with_builtins();
  return r;
}

Signature sig3() { return Signature{{"E", 2}, {"P", 1}, {"Q", 1}}; }

Expr P(const std::string& s) { return parse_expr(s, sig3(), reg()); }

// All-pairs distances by repeated BFS, independent of the library.
std::vector<std::vector<int>> all_dist(const Structure& a) {
  std::size_t n = a.size();
  std::vector<std::vector<Elem>> adj(n);
  for (const auto& t : a.relation("E").tuples()) {
    adj[t[0]].push_back(t[1]);
    adj[t[1]].push_back(t[0]);
  }
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

// Brute-force number of tuples with pattern exactly G satisfying psi
// (over canonical variables), optionally with a fixed first entry.
Int brute_pattern(const Structure& a, const PatternGraph& g, std::int64_t r, const Expr& psi,
                  std::optional<Elem> anchor) {
  auto d = all_dist(a);
  int k = g.k();
  auto ys = canonical_vars(k);
  std::size_t n = a.size();
  Int total = 0;
  std::vector<Elem> t(k, 0);
  std::size_t combos = 1;
  for (int i = 0; i < k; ++i) combos *= n;
  for (std::size_t c = 0; c < combos; ++c) {
    std::size_t x = c;
    for (int i = 0; i < k; ++i) {
      t[i] = static_cast<Elem>(x % n);
      x /= n;
    }
    if (anchor && t[0] != *anchor) continue;
    bool ok = true;
    for (int i = 0; i < k && ok; ++i)
      for (int j = i + 1; j < k && ok; ++j) {
        bool near = d[t[i]][t[j]] >= 0 && d[t[i]][t[j]] <= 2 * r + 1;
        ok = near == g.has_edge(i, j);
      }
    if (!ok) continue;
    Assignment beta;
    for (int i = 0; i < k; ++i) beta[ys[i]] = t[i];
    if (holds(a, reg(), psi, beta)) ++total;
  }
  return total;
}

Structure random_graph(std::size_t n, Rng& rng) {
  std::uniform_int_distribution<int> kind(0, 2);
  std::vector<Edge> e;
  switch (kind(rng)) {
    case 0: e = random_tree_edges(n, rng); break;
    case 1: e = random_max_degree_edges(n, 3, rng); break;
    default: e = random_edges(n, 0.25, rng); break;
  }
  return with_random_unary(graph_structure(n, e), {"P", "Q"}, 0.5, rng);
}

}  // namespace

TEST_CASE("delta formula separates patterns") {
  PatternGraph none(2), edge(2);
  edge.add_edge(0, 1);
  auto a = graph_structure(3, path_edges(3));
  auto ys = canonical_vars(2);
  Assignment ac{{ys[0], 0}, {ys[1], 2}};
  CHECK(holds(a, reg(), delta_formula(none, 1), ac));
  CHECK_FALSE(holds(a, reg(), delta_formula(edge, 1), ac));
  CHECK(holds(a, reg(), delta_formula(edge, 2), ac));
}

TEST_CASE("count_pattern on two disjoint edges") {
  auto a = graph_structure(4, {{0, 1}, {2, 3}});
  PatternGraph none(2);
  auto v = count_pattern(a, reg(), none, 0, {{{0}, mk_true()}, {{1}, mk_true()}}, std::nullopt);
  CHECK(v == 8);
  CHECK(v == brute_pattern(a, none, 0, mk_true(), std::nullopt));
}

TEST_CASE("count_pattern with components {1},{2,3} on a path") {
  auto a = graph_structure(4, path_edges(4));
  PatternGraph g(3);
  g.add_edge(1, 2);
  auto v = count_pattern(a, reg(), g, 0, {}, std::nullopt);
  CHECK(v == brute_pattern(a, g, 0, mk_true(), std::nullopt));
  for (Elem e = 0; e < 4; ++e)
    CHECK(count_pattern(a, reg(), g, 0, {}, e) == brute_pattern(a, g, 0, mk_true(), e));
}

TEST_CASE("pattern counts partition all tuples") {
  Rng rng(7);
  for (int round = 0; round < 6; ++round) {
    std::size_t n = 3 + round % 6;
    auto a = random_graph(n, rng);
    for (int k = 1; k <= 3; ++k) {
      Int total = 0;
      for (const auto& g : PatternGraph::all(k)) {
        Int c = count_pattern(a, reg(), g, 0, {}, std::nullopt);
        CHECK(c == brute_pattern(a, g, 0, mk_true(), std::nullopt));
        total += c;
      }
      Int expect = 1;
      for (int i = 0; i < k; ++i) expect *= n;
      CHECK(total == expect);
    }
  }
}

TEST_CASE("factorized component formulas") {
  Rng rng(11);
  auto ys = canonical_vars(3);
  auto a = random_graph(7, rng);
  PatternGraph g(3);
  g.add_edge(1, 2);
  std::map<std::vector<int>, Expr> comps{{{0}, mk_atom("P", {ys[0]})},
                                         {{1, 2}, mk_and(mk_atom("Q", {ys[1]}), mk_atom("E", {ys[1], ys[2]}))}};
  Expr whole = mk_and(comps[{0}], comps[{1, 2}]);
  CHECK(count_pattern(a, reg(), g, 0, comps, std::nullopt) == brute_pattern(a, g, 0, whole, std::nullopt));
  for (Elem e = 0; e < a.size(); ++e)
    CHECK(count_pattern(a, reg(), g, 0, comps, e) == brute_pattern(a, g, 0, whole, e));
}

TEST_CASE("eval_basic_cl on a star with three leaves") {
  auto a = graph_structure(4, star_edges(4));
  PatternGraph edge(2);
  edge.add_edge(0, 1);
  auto t = make_basic(true, 2, 0, edge, mk_true());
  // The centre itself is within distance 1 of itself, so it is counted too.
  CHECK(eval_basic_cl(a, reg(), *t, 0) == brute_pattern(a, edge, 0, mk_true(), Elem(0)));
  CHECK(eval_basic_cl(a, reg(), *t, 0) == 4);
  auto g = make_basic(false, 2, 0, edge, mk_true());
  Int sum = 0;
  for (Elem e = 0; e < 4; ++e) sum += eval_basic_cl(a, reg(), *t, e);
  CHECK(eval_basic_cl_ground(a, reg(), *g) == sum);
}

TEST_CASE("single-vertex unary basic term") {
  auto a = with_random_unary(graph_structure(5, path_edges(5)), {"P"}, 0.5, *std::make_unique<Rng>(3));
  auto ys = canonical_vars(1);
  auto t = make_basic(true, 1, 0, PatternGraph(1), mk_atom("P", {ys[0]}));
  const auto& p = a.relation("P");
  for (Elem e = 0; e < 5; ++e) CHECK(eval_basic_cl(a, reg(), *t, e) == (p.contains(Tuple{e}) ? 1 : 0));
}

TEST_CASE("neighbourhood and whole-structure evaluation agree") {
  Rng rng(5);
  auto ys = canonical_vars(3);
  std::vector<std::pair<int, std::string>> bodies = {
      {2, "(E(y1,y2) & P(y2))"},
      {2, "exists w. (E(y1,w) & E(w,y2) & !P(w))"},
      {3, "(E(y1,y2) & E(y2,y3) & !y1=y3)"},
      {2, "(P(y1) & !exists w. (E(y2,w) & Q(w)))"},
  };
  for (int round = 0; round < 4; ++round) {
    auto a = random_graph(8 + round, rng);
    for (const auto& [k, text] : bodies) {
      Expr psi = P(text);
      auto rep = analyze_locality(psi, canonical_vars(k));
      REQUIRE(rep.local);
      for (const auto& g : PatternGraph::all(k)) {
        if (!g.connected()) continue;
        auto t = make_basic(true, k, rep.radius, g, psi);
        auto whole = eval_basic_cl_all(a, reg(), *t);
        auto inside = eval_basic_cl_all(a, reg(), *t, {.inside_neighbourhood = true});
        CHECK(whole == inside);
        for (Elem e = 0; e < a.size(); ++e) CHECK(whole[e] == brute_pattern(a, g, rep.radius, psi, e));
      }
    }
  }
}

TEST_CASE("cl-expansion of counts matches direct counting") {
  Rng rng(17);
  struct Case {
    bool unary;
    std::vector<std::string> vars;
    std::string theta;
  };
  std::vector<Case> cases = {
      {true, {"x", "y"}, "E(x,y)"},
      {false, {"x", "y"}, "(E(x,y) & P(x))"},
      {false, {"x", "y"}, "(P(x) & Q(y))"},
      {false, {"x", "y"}, "!E(x,y)"},
      {true, {"x", "y"}, "(P(x) | Q(y))"},
      {false, {"x", "y", "z"}, "(E(x,y) & !E(y,z) & P(z))"},
      {true, {"x", "y", "z"}, "(P(y) & Q(z) & !x=y)"},
      {false, {"x", "y"}, "exists w. (E(x,w) & !E(w,y))"},
      {true, {"x", "y"}, "(P(x) -> exists w. (E(y,w) & (Q(w) | P(x))))"},
      {false, {"x"}, "(P(x) & exists w. (E(x,w) & Q(w)))"},
      {false, {"x", "y"}, "(dist(x,y) <= 2 & !E(x,y))"},
  };
  for (const auto& c : cases) {
    std::vector<Var> ys;
    for (const auto& v : c.vars) ys.push_back(Var(v));
    Expr theta = P(c.theta);
    auto poly = expand_count(c.unary, ys, theta);
    std::vector<Var> counted(ys.begin() + (c.unary ? 1 : 0), ys.end());
    Expr direct = mk_count(counted, theta);
    for (int round = 0; round < 3; ++round) {
      auto a = random_graph(6 + 2 * round, rng);
      DirectClEngine engine(reg());
      std::vector<std::vector<Int>> anchors;
      std::vector<Int> totals;
      for (const auto& b : poly.basics()) {
        if (b->unary)
          anchors.push_back(engine.anchor_values(a, *b));
        else
          anchors.push_back({});
        totals.push_back(b->unary ? Int(0) : engine.ground_value(a, *b));
      }
      if (c.unary) {
        for (Elem e = 0; e < a.size(); ++e) {
          std::vector<Int> vals;
          for (std::size_t i = 0; i < poly.basics().size(); ++i)
            vals.push_back(poly.basics()[i]->unary ? anchors[i][e] : totals[i]);
          CHECK_MESSAGE(poly.evaluate(vals) == value(a, reg(), direct, {{ys[0], e}}), c.theta);
        }
      } else {
        CHECK_MESSAGE(poly.evaluate(totals) == value(a, reg(), direct), c.theta);
      }
    }
  }
}

TEST_CASE("expansion rejects non-local bodies") {
  CHECK_THROWS_AS(expand_count(false, {Var("x")}, P("(exists w. Q(w) & P(x))") ), UnsupportedError);
  CHECK_THROWS_AS(expand_count(false, {Var("x"), Var("y")}, P("exists w. (Q(w) & E(x,y))")), UnsupportedError);
}

TEST_CASE("dispatch_sentences") {
  auto a = graph_structure(3, path_edges(3));
  Expr phi = P("(exists x. E(x,x) | E(y,z))");
  auto d0 = dispatch_sentences(P("E(y,z)"), a, reg());
  CHECK(d0.J.empty());
  CHECK(render(d0.residual) == "E(y,z)");
  auto d1 = dispatch_sentences(phi, a, reg());
  CHECK(d1.J.empty());
  CHECK(render(d1.residual) == "E(y,z)");
  Expr both = P("((exists x. E(x,x) | exists x. !E(x,x)) & E(y,z))");
  auto chis = std::vector<Expr>{P("exists x. E(x,x)"), P("exists x. !E(x,x)")};
  auto d2 = dispatch_sentences(both, chis, a, reg());
  CHECK(d2.J == std::vector<int>{2});
  CHECK(render(d2.residual) == "E(y,z)");
}

TEST_CASE("decomposition of a prime-degree sentence") {
  Expr xi = P("exists y. prime(#(z).E(y,z))");
  auto d = cl_decompose(xi, sig3());
  REQUIRE(d.layers.size() == 2);
  CHECK(d.layers[0].symbols.size() == 1);
  CHECK(d.layers[0].symbols[0].arity == 1);
  CHECK(d.layers[0].symbols[0].pred == "prime");
  Rng rng(23);
  DirectClEngine engine(reg());
  for (int i = 0; i < 20; ++i) {
    auto a = random_graph(2 + i % 9, rng);
    auto v = eval_decomposition(d, a, engine, reg());
    CHECK(v.truth == holds(a, reg(), xi));
  }
}

TEST_CASE("decomposition of the edge count") {
  Expr t = P("#(x,y).E(x,y)");
  auto d = cl_decompose(t, sig3());
  CHECK(d.is_term);
  Rng rng(29);
  DirectClEngine engine(reg());
  for (int i = 0; i < 10; ++i) {
    auto a = random_graph(3 + i, rng);
    auto v = eval_decomposition(d, a, engine, reg());
    CHECK(v.value == Int(a.relation("E").size()));
  }
}

TEST_CASE("decomposition of a local sentence") {
  Expr xi = P("(exists x. (P(x) & exists y. (E(x,y) & Q(y))) | !exists x. Q(x))");
  auto d = cl_decompose(xi, sig3());
  REQUIRE(d.layers.size() == 1);
  for (const auto& s : d.layers[0].symbols) CHECK(s.pred == "geq1");
  Rng rng(31);
  DirectClEngine engine(reg());
  for (int i = 0; i < 15; ++i) {
    auto a = random_graph(2 + i % 7, rng);
    CHECK(eval_decomposition(d, a, engine, reg()).truth == holds(a, reg(), xi));
  }
}

TEST_CASE("decomposition with nested counts and sentences") {
  std::vector<std::string> inputs = {
      "exists x. (P(x) & prime((#(y).E(x,y) + #(y).(Q(y) & exists w. (E(y,w) & P(w))))))",
      "exists x. prime(#(y).(E(x,y) & exists z. P(z)))",
      "forall x. (geq1(#(y).(E(x,y) & !prime(#(z).E(y,z)))) | !P(x))",
      "prime(#(x,y).(E(x,y) & prime(#(z).(E(x,z) & Q(z)))))",
      "eq(#(x).P(x), #(x).Q(x))",
  };
  Rng rng(37);
  DirectClEngine engine(reg());
  DirectClEngine inside(reg(), {.inside_neighbourhood = true});
  for (const auto& text : inputs) {
    Expr xi = P(text);
    auto d = cl_decompose(xi, sig3());
    CHECK(static_cast<int>(d.layers.size()) == count_depth(xi) + 1);
    for (int i = 0; i < 8; ++i) {
      auto a = random_graph(3 + i, rng);
      bool expect = holds(a, reg(), xi);
      CHECK_MESSAGE(eval_decomposition(d, a, engine, reg()).truth == expect, text);
      CHECK_MESSAGE(eval_decomposition(d, a, inside, reg()).truth == expect, text);
    }
  }
}

TEST_CASE("ground term with a nested sentence") {
  Expr t = P("(#(x,y).(E(x,y) & exists z. (P(z) & Q(z))) + (2 * #(x).prime(#(y).E(x,y))))");
  auto d = cl_decompose(t, sig3());
  Rng rng(41);
  DirectClEngine engine(reg());
  for (int i = 0; i < 10; ++i) {
    auto a = random_graph(3 + i, rng);
    CHECK(eval_decomposition(d, a, engine, reg()).value == value(a, reg(), t));
  }
}
