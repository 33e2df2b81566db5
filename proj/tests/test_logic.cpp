#include "doctest.h"

#include "focq/analysis.hpp"
#include "focq/eval.hpp"
#include "focq/generators.hpp"
#include "focq/parser.hpp"

using namespace focq;

namespace {

Signature graph_sig() { return Signature{{"E", 2}}; }

Expr P(const std::string& s, const Signature& sig = graph_sig()) {
  static PredicateRegistry reg = PredicateRegistry::with_builtins();
  return parse_expr(s, sig, reg);
}

}  // namespace

TEST_CASE("count of x=x is the universe size") {
  auto a = graph_structure(5, path_edges(5));
  auto reg = PredicateRegistry::with_builtins();
  CHECK(value(a, reg, P("#(x).x=x")) == 5);
}

TEST_CASE("prime of node plus edge count on a directed triangle") {
  auto a = graph_structure(3, cycle_edges(3), true);
  auto reg = PredicateRegistry::with_builtins();
  auto f = P("prime((#(x).x=x + #(x,y).E(x,y)))");
  CHECK_FALSE(holds(a, reg, f));
  CHECK(value(a, reg, P("(#(x).x=x + #(x,y).E(x,y))")) == 6);
}

TEST_CASE("out-degree term") {
  auto a = graph_structure(3, {{0, 1}, {0, 2}}, true);
  auto reg = PredicateRegistry::with_builtins();
  auto t = P("#(z).E(y,z)");
  CHECK(free_vars(t) == VarSet{Var("y")});
  CHECK(value(a, reg, t, {{Var("y"), 0}}) == 2);
  CHECK(value(a, reg, t, {{Var("y"), 1}}) == 0);
}

TEST_CASE("render round trip") {
  for (const char* s : {"#(x).x=x", "exists x. (E(x,y) & !x=y)", "forall x. (E(x,y) -> dist(x,y)<=2)",
                        "prime((#(x).x=x + #(x,y).E(x,y)))", "(#(z).E(y,z) * 3) >= 1", "#().true"}) {
    auto e = P(s);
    CHECK(structurally_equal(P(render(e)), e));
    CHECK(structurally_equal(P(render(e, {false})), e));
  }
}

TEST_CASE("fo1c validation") {
  CHECK_FALSE(validate_fo1c(P("eq(#(z).E(x,z), #(z).E(y,z))")).ok);
  CHECK(validate_fo1c(P("prime(#(x).x=x)")).ok);
  CHECK(validate_fo1c(P("geq1(#(z).E(y,z))")).ok);
}

TEST_CASE("locality radius") {
  auto r = analyze_locality(P("exists z. (E(y,z) & exists w. (E(z,w) & !w=y))"), {Var("y")});
  CHECK(r.local);
  CHECK(r.radius == 2);
  auto bad = analyze_locality(P("exists z. !E(y,z)"), {Var("y")});
  CHECK_FALSE(bad.local);
  auto s = analyze_locality(P("(E(y,y) | exists z. E(z,z))"), {Var("y")});
  CHECK(s.local);
  CHECK(s.sentences.size() == 1);
}
