#include "doctest.h"

#include <queue>

#include "focq/eval.hpp"
#include "focq/parser.hpp"
#include "focq/reductions.hpp"

using namespace focq;

namespace {

const PredicateRegistry& reg() {
  static PredicateRegistry r = PredicateRegistry::with_builtins();
  return r;
}

std::vector<Expr> sentence_pool() {
  Signature g{{"E", 2}};
  std::vector<std::string> texts = {
      "exists x. exists y. E(x,y)",
      "exists x. exists y. exists z. (E(x,y) & E(y,z) & E(x,z))",
      "exists x. forall y. !E(x,y)",
      "exists x. forall y. (x = y | E(x,y))",
      "exists x. exists y. exists z. (!x = z & E(x,y) & E(y,z))",
  };
  std::vector<Expr> out;
  for (const auto& t : texts) out.push_back(parse_expr(t, g, reg()));
  return out;
}

std::vector<std::vector<Edge>> all_graphs(std::size_t n) {
  std::vector<Edge> pairs;
  for (Elem i = 0; i < n; ++i)
    for (Elem j = i + 1; j < n; ++j) pairs.push_back({i, j});
  std::vector<std::vector<Edge>> out;
  for (std::size_t m = 0; m < (std::size_t(1) << pairs.size()); ++m) {
    std::vector<Edge> es;
    for (std::size_t i = 0; i < pairs.size(); ++i)
      if (m >> i & 1) es.push_back(pairs[i]);
    out.push_back(es);
  }
  return out;
}

bool is_tree(const Structure& t) {
  std::size_t n = t.size();
  std::vector<bool> seen(n, false);
  std::queue<Elem> q;
  q.push(0);
  seen[0] = true;
  std::size_t count = 1;
  while (!q.empty()) {
    Elem v = q.front();
    q.pop();
    for (Elem w : t.neighbours(v))
      if (!seen[w]) {
        seen[w] = true;
        ++count;
        q.push(w);
      }
  }
  return count == n && t.relation("E").size() == 2 * (n - 1);
}

}  // namespace

TEST_CASE("tree encoding sizes") {
  auto k2 = encode_tree(2, {{0, 1}});
  CHECK(k2.tree.size() == 20);
  CHECK(k2.height == 3);
  CHECK(is_tree(k2.tree));
  auto one = encode_tree(1, {});
  CHECK(one.tree.size() == 6);
  CHECK(is_tree(one.tree));
  // Quadratic size: vertices are bounded by (n+1)^2 plus twice the edge term.
  auto big = encode_tree(30, path_edges(30));
  CHECK(is_tree(big.tree));
  CHECK(big.height == 3);
}

TEST_CASE("tree roles are definable") {
  for (std::size_t n = 1; n <= 5; ++n)
    for (const auto& es : all_graphs(n)) {
      if (n == 5 && es.size() % 3 != 0) continue;
      auto t = encode_tree(n, es);
      Evaluator ev(t.tree, reg());
      Var x("x");
      for (char r : std::string("rabcde")) {
        Expr f = tree_role_formula(r, x);
        for (Elem e = 0; e < t.tree.size(); ++e)
          CHECK_MESSAGE(ev.holds(f, {{x, e}}) == (t.roles[e] == r), "role " << r << " at " << t.tree.name(e));
      }
    }
}

TEST_CASE("string encoding") {
  CHECK(encode_string(2, {{0, 1}}).word == "acbccaccbc");
  CHECK(encode_string(1, {}).word == "ac");
  auto s = encode_string(3, {{0, 2}, {1, 2}});
  const auto& a = s.structure;
  std::size_t letters = a.relation("Pa").size() + a.relation("Pb").size() + a.relation("Pc").size();
  CHECK(letters == a.size());
  CHECK(a.relation("Le").size() == a.size() * (a.size() + 1) / 2);
}

TEST_CASE("reductions preserve truth") {
  auto pool = sentence_pool();
  std::vector<Expr> tree_hat, string_hat;
  for (const auto& phi : pool) {
    tree_hat.push_back(rewrite_tree_formula(phi));
    string_hat.push_back(rewrite_string_formula(phi));
  }
  auto check = [&](std::size_t n, const std::vector<Edge>& es) {
    auto g = graph_structure(n, es);
    auto t = encode_tree(n, es);
    auto s = encode_string(n, es);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      bool expect = holds(g, reg(), pool[i]);
      CHECK_MESSAGE(holds(t.tree, reg(), tree_hat[i]) == expect, render(pool[i]) << " n=" << n);
      CHECK_MESSAGE(holds(s.structure, reg(), string_hat[i]) == expect, render(pool[i]) << " n=" << n);
    }
  };
  for (std::size_t n = 1; n <= 4; ++n)
    for (const auto& es : all_graphs(n)) check(n, es);
  Rng rng(61);
  for (int i = 0; i < 50; ++i) {
    std::size_t n = 5 + rng() % 4;
    check(n, random_edges(n, 0.35, rng));
  }
}

TEST_CASE("rewriting rejects other relations") {
  Signature s{{"E", 2}, {"P", 1}};
  CHECK_THROWS_AS(rewrite_tree_formula(parse_expr("exists x. P(x)", s, reg())), InputError);
  CHECK_THROWS_AS(rewrite_string_formula(parse_expr("exists x. geq1(#(y).E(x,y))", s, reg())), InputError);
}
