#include "doctest.h"

#include "focq/corpus.hpp"
#include "focq/eval.hpp"
#include "focq/io.hpp"
#include "focq/parser.hpp"

using namespace focq;

TEST_CASE("structure json round trip") {
  Rng rng(3);
  Structure a = with_random_unary(family_graph(Family::RandomTree, 12, rng), {"P"}, 0.5, rng);
  Json j = structure_to_json(a);
  Structure b = structure_from_json(Json::parse(j.dump()));
  CHECK(b.names() == a.names());
  CHECK(structure_to_json(b) == j);
}

TEST_CASE("malformed inputs are input errors") {
  CHECK_THROWS_AS(structure_from_json(Json::parse(R"({"relations":{}})")), InputError);
  CHECK_THROWS_AS(structure_from_json(Json::parse(R"({"universe":["a"],"relations":{"E":{"arity":2,"tuples":[["a"]]}}})")),
                  InputError);
  CHECK_THROWS_AS(graph_from_json(Json::parse(R"({"n":2,"edges":[[1,3]]})")), InputError);
  CHECK_THROWS_AS(graph_from_json(Json::parse(R"({"n":2})")), InputError);
}

TEST_CASE("graph json") {
  auto g = graph_from_json(Json::parse(R"({"n":3,"edges":[[1,2],[2,3]]})"));
  CHECK(g.n == 3);
  REQUIRE(g.edges.size() == 2);
  CHECK(g.edges[1] == Edge{1, 2});
  CHECK(graph_to_json(g.n, g.edges).dump() == R"({"n":3,"edges":[[1,2],[2,3]]})");
}

TEST_CASE("generated corpus stays in range") {
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    Expr s = random_fo1c_sentence(rng);
    CHECK(free_vars(s).empty());
    CHECK(count_depth(s) <= 2);
    Expr t = random_fo1c_ground_term(rng, {1, 3});
    CHECK(free_vars(t).empty());
    CHECK(count_depth(t) <= 1);
    // Rendered inputs parse back.
    auto reg = PredicateRegistry::with_builtins();
    CHECK(render(parse_expr(render(s), corpus_signature(), reg)) == render(s));
  }
  std::size_t rejected = 0;
  auto items = acceptance_corpus(8, 5, 40, &rejected);
  CHECK(items.size() == 8);
  CHECK(items[1].structure.size() == 100);
}
