#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "focq/structure.hpp"

namespace focq {

using Rng = std::mt19937_64;
using Edge = std::pair<Elem, Elem>;

// Zero-padded element names so that index order equals name order.
std::vector<std::string> numbered_names(std::size_t n, const std::string& prefix = "v");

// Graph as a structure over a binary relation (both directions stored
// unless `directed`).
Structure graph_structure(std::size_t n, const std::vector<Edge>& edges, bool directed = false,
                          const std::string& rel = "E");

std::vector<Edge> path_edges(std::size_t n);
std::vector<Edge> cycle_edges(std::size_t n);
std::vector<Edge> star_edges(std::size_t n);  // vertex 0 is the hub
std::vector<Edge> grid_edges(std::size_t w, std::size_t h);
std::vector<Edge> random_tree_edges(std::size_t n, Rng& rng);
std::vector<Edge> random_max_degree_edges(std::size_t n, std::size_t max_degree, Rng& rng);
std::vector<Edge> random_edges(std::size_t n, double p, Rng& rng);

enum class Family { Path, Cycle, Star, Grid, RandomTree, MaxDegree3 };
Family parse_family(const std::string& name);
std::string family_name(Family f);
// Graph from a family with about n vertices (grids are rounded to squares).
Structure family_graph(Family f, std::size_t n, Rng& rng);

// Adds unary relations, each element included independently with prob. p.
Structure with_random_unary(const Structure& a, const std::vector<std::string>& names, double p,
                            Rng& rng);

std::vector<Edge> edges_of(const Structure& a, const std::string& rel = "E");

}  // namespace focq
