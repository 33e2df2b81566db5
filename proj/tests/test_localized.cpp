#include "doctest.h"

#include "focq/cl.hpp"
#include "focq/eval.hpp"
#include "focq/generators.hpp"
#include "focq/localized.hpp"
#include "focq/parser.hpp"

using namespace focq;

namespace {

const PredicateRegistry& reg() {
  static PredicateRegistry r = PredicateRegistry::with_builtins();
  return r;
}

Signature sig3() { return Signature{{"E", 2}, {"P", 1}, {"Q", 1}}; }

Expr P(const std::string& s) { return parse_expr(s, sig3(), reg()); }

std::vector<BasicClTermPtr> basics_of(bool unary, const std::vector<std::string>& vars, const std::string& theta) {
  std::vector<Var> ys;
  for (const auto& v : vars) ys.push_back(Var(v));
  return expand_count(unary, ys, P(theta)).basics();
}

Structure sample(Family f, std::size_t n, Rng& rng) {
  return with_random_unary(family_graph(f, n, rng), {"P", "Q"}, 0.4, rng);
}

}  // namespace

TEST_CASE("localized values equal direct values") {
  std::vector<BasicClTermPtr> terms;
  for (auto [u, vars, theta] : std::vector<std::tuple<bool, std::vector<std::string>, std::string>>{
           {true, {"x", "y"}, "E(x,y)"},
           {false, {"x", "y"}, "(E(x,y) & P(x))"},
           {true, {"x", "y"}, "(P(x) | Q(y))"},
           {false, {"x", "y", "z"}, "(E(x,y) & !E(y,z) & P(z))"},
           {false, {"x", "y"}, "exists w. (E(x,w) & !E(w,y))"},
           {true, {"x", "y"}, "(P(x) -> exists w. (E(y,w) & (Q(w) | P(x))))"},
           {false, {"x"}, "(P(x) & exists w. (E(x,w) & Q(w)))"},
       })
    for (const auto& b : basics_of(u, vars, theta)) terms.push_back(b);
  REQUIRE(terms.size() > 5);
  Rng rng(43);
  LocalizedConfig cfg;
  cfg.threshold = 8;
  for (auto fam : {Family::Star, Family::Path, Family::RandomTree, Family::Grid, Family::MaxDegree3}) {
    auto a = sample(fam, 40, rng);
    for (const auto& t : terms) {
      LocalizedReport rep;
      auto got = localized_unary(a, reg(), *t, cfg, &rep);
      auto expect = eval_basic_cl_all(a, reg(), *t);
      CHECK_MESSAGE(got == expect, family_name(fam) << " " << t->key);
      CHECK(localized_ground(a, reg(), *t, cfg) == eval_basic_cl_ground(a, reg(), *t));
    }
  }
  // Two removal levels on smaller structures.
  cfg.recursion_cap = 2;
  for (auto fam : {Family::Star, Family::RandomTree, Family::MaxDegree3}) {
    auto a = sample(fam, 24, rng);
    for (std::size_t i = 0; i < terms.size(); i += 2) {
      LocalizedReport rep;
      CHECK(localized_unary(a, reg(), *terms[i], cfg, &rep) == eval_basic_cl_all(a, reg(), *terms[i]));
    }
  }
}

TEST_CASE("localized evaluation recurses on a star") {
  auto a = graph_structure(50, star_edges(50));
  auto t = basics_of(true, {"x", "y"}, "E(x,y)");
  REQUIRE(t.size() == 1);
  LocalizedReport rep;
  auto got = localized_unary(a, reg(), *t[0], {}, &rep);
  CHECK(got == eval_basic_cl_all(a, reg(), *t[0]));
  CHECK(got[0] == 49);
  CHECK(rep.removals >= 1);
  CHECK(rep.max_depth >= 1);
  CHECK(rep.fallbacks == 0);
}

TEST_CASE("triangle pattern on a path is zero everywhere") {
  auto a = graph_structure(100, path_edges(100));
  auto t = basics_of(true, {"x", "y", "z"}, "(E(x,y) & E(y,z) & E(z,x))");
  for (const auto& b : t)
    for (const auto& v : localized_unary(a, reg(), *b)) CHECK(v == 0);
}

TEST_CASE("width-1 terms on random trees") {
  Rng rng(47);
  auto t = basics_of(true, {"x"}, "(P(x) & exists w. (E(x,w) & Q(w)))");
  for (int i = 0; i < 5; ++i) {
    auto a = sample(Family::RandomTree, 50 + 30 * i, rng);
    LocalizedConfig cfg;
    cfg.threshold = 16;
    for (const auto& b : t) CHECK(localized_unary(a, reg(), *b, cfg) == eval_basic_cl_all(a, reg(), *b));
  }
  auto k1 = basics_of(false, {"x"}, "P(x)");
  auto a = sample(Family::RandomTree, 80, rng);
  REQUIRE(k1.size() == 1);
  CHECK(localized_ground(a, reg(), *k1[0]) == static_cast<long>(a.relation("P").size()));
}

TEST_CASE("worker count does not change results") {
  Rng rng(53);
  auto a = sample(Family::Grid, 100, rng);
  auto t = basics_of(false, {"x", "y"}, "exists w. (E(x,w) & !E(w,y))");
  for (const auto& b : t) {
    LocalizedConfig one, four;
    one.threshold = four.threshold = 10;
    four.jobs = 4;
    CHECK(localized_unary(a, reg(), *b, one) == localized_unary(a, reg(), *b, four));
  }
}

TEST_CASE("end-to-end evaluation matches the reference evaluator") {
  std::vector<std::string> inputs = {
      "exists x. (P(x) & prime((#(y).E(x,y) + #(y).(Q(y) & exists w. (E(y,w) & P(w))))))",
      "exists y. geq1(#(z).E(y,z))",
      "forall x. (geq1(#(y).(E(x,y) & !prime(#(z).E(y,z)))) | !P(x))",
      "prime(#(x,y).(E(x,y) & prime(#(z).(E(x,z) & Q(z)))))",
      "eq(#(x).P(x), #(x).Q(x))",
  };
  Rng rng(59);
  LocalizedConfig cfg;
  cfg.threshold = 12;
  for (const auto& text : inputs) {
    Expr xi = P(text);
    for (auto fam : {Family::Star, Family::RandomTree, Family::MaxDegree3}) {
      auto a = sample(fam, 45, rng);
      auto out = evaluate(xi, a, reg(), cfg);
      CHECK_MESSAGE(out.value.truth == holds(a, reg(), xi), text << " on " << family_name(fam));
    }
  }
  Expr edges = P("#(x,y).E(x,y)");
  auto a = sample(Family::Grid, 64, rng);
  auto out = evaluate(edges, a, reg(), cfg);
  CHECK(out.value.is_term);
  CHECK(out.value.value == static_cast<long>(a.relation("E").size()));
}

TEST_CASE("localized query evaluation matches the reference") {
  Rng rng(67);
  Signature sig = sig3();
  ParseContext ctx{&sig, &reg(), nullptr};
  std::vector<std::string> texts = {
      "(x, #(y).E(x,y)). P(x)",
      "(x, y). (E(x,y) & Q(y))",
      "(#(x,y).E(x,y)). exists x. P(x)",
      "(x). prime(#(y).(E(x,y) & !P(y)))",
  };
  LocalizedConfig cfg;
  cfg.threshold = 8;
  for (auto fam : {Family::Star, Family::RandomTree}) {
    auto a = sample(fam, 18, rng);
    for (const auto& text : texts) {
      Query q = parse_query(text, ctx);
      CHECK_MESSAGE(evaluate_query(q, a, reg(), cfg) == eval_query(q, a, reg()), text);
    }
  }
}
