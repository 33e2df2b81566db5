#pragma once

#include <string>
#include <vector>

#include "focq/expr.hpp"
#include "focq/generators.hpp"
#include "focq/structure.hpp"

namespace focq {

// Random FO1C inputs over E (binary), P and Q (unary) with built-in
// predicates. Quantifiers are guarded by an edge to a variable in scope,
// so bodies are local around their free variables.
struct Fo1cGenOptions {
  int max_count_depth = 2;
  int max_width = 3;  // counted variables per counting term
};

Expr random_fo1c_sentence(Rng& rng, Fo1cGenOptions opt = {});
Expr random_fo1c_ground_term(Rng& rng, Fo1cGenOptions opt = {});

Signature corpus_signature();

// Random first-order formula without counting over E and the given unary
// relations, quantifier rank at most `rank`, about `size` connectives and
// distance bounds at most max_dist. Variables are drawn from `pool`.
Expr random_fo_formula(Rng& rng, int rank, int size, int max_dist, const std::vector<Var>& pool,
                       const std::vector<std::string>& unary = {"P"});

// Directed graph on n elements, each arc (loops included) with probability
// arc_percent/100, plus a random unary relation P.
Structure random_digraph(Rng& rng, std::size_t n, int arc_percent = 22);

struct CorpusItem {
  std::string family;
  Structure structure;
  Expr input;
};

// Structures from random trees, 10x10 grids, max-degree-3 graphs and
// stars paired with generated inputs accepted by the decomposition.
// `rejected` counts generated inputs the decomposition refused.
std::vector<CorpusItem> acceptance_corpus(std::size_t count, std::uint64_t seed, std::size_t max_n,
                                          std::size_t* rejected = nullptr);

}  // namespace focq
