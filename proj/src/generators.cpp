#include "focq/generators.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace focq {

std::vector<std::string> numbered_names(std::size_t n, const std::string& prefix) {
  std::size_t digits = std::to_string(n == 0 ? 0 : n - 1).size();
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string s = std::to_string(i);
    out.push_back(prefix + std::string(digits - s.size(), '0') + s);
  }
  return out;
}

Structure graph_structure(std::size_t n, const std::vector<Edge>& edges, bool directed,
                          const std::string& rel) {
  std::set<Tuple> ts;
  for (auto [a, b] : edges) {
    if (a >= n || b >= n) throw InputError("edge endpoint out of range");
    ts.insert(Tuple{a, b});
    if (!directed) ts.insert(Tuple{b, a});
  }
  return Structure::from_sorted(Signature{{rel, 2}}, numbered_names(n),
                                {std::vector<Tuple>(ts.begin(), ts.end())});
}

std::vector<Edge> path_edges(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.push_back({Elem(i), Elem(i + 1)});
  return e;
}

std::vector<Edge> cycle_edges(std::size_t n) {
  auto e = path_edges(n);
  if (n >= 3) e.push_back({Elem(n - 1), 0});
  return e;
}

std::vector<Edge> star_edges(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 1; i < n; ++i) e.push_back({0, Elem(i)});
  return e;
}

std::vector<Edge> grid_edges(std::size_t w, std::size_t h) {
  std::vector<Edge> e;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      Elem v = Elem(y * w + x);
      if (x + 1 < w) e.push_back({v, v + 1});
      if (y + 1 < h) e.push_back({v, Elem(v + w)});
    }
  return e;
}

std::vector<Edge> random_tree_edges(std::size_t n, Rng& rng) {
  std::vector<Edge> e;
  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    e.push_back({Elem(pick(rng)), Elem(i)});
  }
  return e;
}

std::vector<Edge> random_max_degree_edges(std::size_t n, std::size_t max_degree, Rng& rng) {
  std::vector<Edge> e;
  if (n < 2) return e;
  std::vector<std::size_t> deg(n, 0);
  std::set<std::pair<Elem, Elem>> seen;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::size_t attempts = n * max_degree * 2;
  for (std::size_t t = 0; t < attempts; ++t) {
    Elem a = Elem(pick(rng)), b = Elem(pick(rng));
    if (a == b || deg[a] >= max_degree || deg[b] >= max_degree) continue;
    auto key = std::minmax(a, b);
    if (!seen.insert(key).second) continue;
    ++deg[a];
    ++deg[b];
    e.push_back({a, b});
  }
  return e;
}

std::vector<Edge> random_edges(std::size_t n, double p, Rng& rng) {
  std::vector<Edge> e;
  std::bernoulli_distribution coin(p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng)) e.push_back({Elem(i), Elem(j)});
  return e;
}

Family parse_family(const std::string& name) {
  if (name == "path") return Family::Path;
  if (name == "cycle") return Family::Cycle;
  if (name == "star") return Family::Star;
  if (name == "grid") return Family::Grid;
  if (name == "random-tree" || name == "tree") return Family::RandomTree;
  if (name == "maxdeg3" || name == "random-max-degree") return Family::MaxDegree3;
  throw InputError("unknown structure family '" + name + "'");
}

std::string family_name(Family f) {
  switch (f) {
    case Family::Path: return "path";
    case Family::Cycle: return "cycle";
    case Family::Star: return "star";
    case Family::Grid: return "grid";
    case Family::RandomTree: return "random-tree";
    case Family::MaxDegree3: return "maxdeg3";
  }
  return "?";
}

Structure family_graph(Family f, std::size_t n, Rng& rng) {
  if (n == 0) throw InputError("structures have a non-empty universe");
  switch (f) {
    case Family::Path: return graph_structure(n, path_edges(n));
    case Family::Cycle: return graph_structure(n, cycle_edges(n));
    case Family::Star: return graph_structure(n, star_edges(n));
    case Family::Grid: {
      std::size_t w = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(std::sqrt(double(n)))));
      std::size_t h = std::max<std::size_t>(1, (n + w - 1) / w);
      return graph_structure(w * h, grid_edges(w, h));
    }
    case Family::RandomTree: return graph_structure(n, random_tree_edges(n, rng));
    case Family::MaxDegree3: return graph_structure(n, random_max_degree_edges(n, 3, rng));
  }
  throw InputError("unknown family");
}

Structure with_random_unary(const Structure& a, const std::vector<std::string>& names, double p, Rng& rng) {
  std::map<std::string, ExtraRelation> extra;
  std::bernoulli_distribution coin(p);
  for (const auto& name : names) {
    ExtraRelation r{1, {}};
    for (Elem e = 0; e < a.size(); ++e)
      if (coin(rng)) r.tuples.push_back({e});
    extra[name] = std::move(r);
  }
  return expand(a, extra);
}

std::vector<Edge> edges_of(const Structure& a, const std::string& rel) {
  std::vector<Edge> out;
  for (const auto& t : a.relation(rel).tuples())
    if (t[0] < t[1]) out.push_back({t[0], t[1]});
  return out;
}

}  // namespace focq
