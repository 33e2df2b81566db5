#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "focq/structure.hpp"

namespace focq {

// Neighbourhood cover: every element a is assigned the cluster X(a), which
// contains the r-ball around a; each cluster lies within distance s of its
// centre inside the substructure it induces.
struct Cover {
  std::int64_t r = 0;
  std::int64_t s = 0;
  std::vector<std::uint32_t> cluster_of;
  std::vector<std::vector<Elem>> clusters;  // sorted element lists
  std::vector<Elem> centre;
  std::vector<std::vector<Elem>> members;   // elements assigned to each cluster
};

// Greedy (r, 2r)-cover: vertices in order of decreasing degree; each
// unassigned vertex v opens the cluster ball(v, 2r) and takes every
// unassigned element within distance r of v.
Cover build_cover(const Structure& a, std::int64_t r);

struct CoverReport {
  bool ok = true;
  std::vector<std::string> violations;
  std::size_t clusters = 0;
  std::size_t max_degree = 0;
  std::size_t total_size = 0;  // sum of cluster sizes
  std::int64_t max_radius = 0;
  std::map<std::size_t, std::size_t> degree_histogram;  // degree -> number of elements
};

CoverReport validate_cover(const Structure& a, const Cover& c);

// Undirected simple graph given by adjacency lists.
using Graph = std::vector<std::vector<Elem>>;

Graph gaifman_adjacency(const Structure& a);

// The (l, r)-splitter game: Connector picks a, Splitter picks b in the
// r-ball of a in the current graph, play continues on that ball minus b.
// Splitter wins when the remaining graph is empty.
struct GameValue {
  std::int64_t r = 0;
  // Least number of rounds Splitter needs, if at most the round limit.
  std::optional<int> value;
  int max_rounds = 0;
  // (remaining vertex set as bit mask, Connector's vertex) -> Splitter's vertex
  std::map<std::pair<std::uint32_t, Elem>, Elem> strategy;
};

// Exact minimax over vertex subsets; refuses graphs above `cap` vertices.
GameValue solve_splitter(const Graph& g, std::int64_t r, int max_rounds, std::size_t cap = 16);

// Splitter's answer when Connector plays `a` on the whole graph g: the
// exact optimal move for graphs within the cap, otherwise on forests the
// vertex of the r-ball closest to the centre of its tree, and on other
// graphs the ball vertex of largest degree.
Elem splitter_move(const Graph& g, Elem a, std::int64_t r, std::size_t cap = 16);

}  // namespace focq
