#include "focq/covers.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <numeric>
#include <unordered_map>

#include "focq/cl.hpp"

namespace focq {

Cover build_cover(const Structure& a, std::int64_t r) {
  if (r < 0) throw InputError("cover radius must be non-negative");
  std::size_t n = a.size();
  Cover c;
  c.r = r;
  c.s = 2 * r;
  c.cluster_of.assign(n, UINT32_MAX);
  std::vector<Elem> order(n);
  std::iota(order.begin(), order.end(), Elem(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Elem x, Elem y) { return a.neighbours(x).size() > a.neighbours(y).size(); });
  LocalBfs bfs(a);
  for (Elem v : order) {
    if (c.cluster_of[v] != UINT32_MAX) continue;
    auto id = static_cast<std::uint32_t>(c.clusters.size());
    std::vector<Elem> cluster, mem;
    for (auto [w, d] : bfs.run(v, static_cast<std::uint32_t>(2 * r))) {
      cluster.push_back(w);
      if (d <= r && c.cluster_of[w] == UINT32_MAX) {
        c.cluster_of[w] = id;
        mem.push_back(w);
      }
    }
    std::sort(cluster.begin(), cluster.end());
    std::sort(mem.begin(), mem.end());
    c.clusters.push_back(std::move(cluster));
    c.members.push_back(std::move(mem));
    c.centre.push_back(v);
  }
  return c;
}

CoverReport validate_cover(const Structure& a, const Cover& c) {
  CoverReport rep;
  std::size_t n = a.size();
  auto fail = [&](std::string msg) {
    rep.ok = false;
    if (rep.violations.size() < 20) rep.violations.push_back(std::move(msg));
  };
  rep.clusters = c.clusters.size();
  if (c.cluster_of.size() != n) {
    fail("cover does not assign every element");
    return rep;
  }
  if (c.centre.size() != c.clusters.size() || c.members.size() != c.clusters.size()) {
    fail("cluster tables have different lengths");
    return rep;
  }
  std::vector<std::size_t> degree(n, 0);
  std::vector<std::int32_t> mark(n, -1);
  for (std::size_t id = 0; id < c.clusters.size(); ++id) {
    const auto& x = c.clusters[id];
    rep.total_size += x.size();
    if (!std::is_sorted(x.begin(), x.end())) fail("cluster " + std::to_string(id) + " is not sorted");
    for (Elem e : x) {
      if (e >= n) {
        fail("cluster " + std::to_string(id) + " has an element out of range");
        return rep;
      }
      ++degree[e];
      mark[e] = static_cast<std::int32_t>(id);
    }
    // Radius from the centre inside the induced substructure.
    Elem ctr = c.centre[id];
    if (mark[ctr] != static_cast<std::int32_t>(id)) {
      fail("centre of cluster " + std::to_string(id) + " is not in the cluster");
      continue;
    }
    std::unordered_map<Elem, std::int64_t> dist{{ctr, 0}};
    std::vector<Elem> queue{ctr};
    for (std::size_t h = 0; h < queue.size(); ++h)
      for (Elem w : a.neighbours(queue[h]))
        if (mark[w] == static_cast<std::int32_t>(id) && dist.emplace(w, dist[queue[h]] + 1).second)
          queue.push_back(w);
    if (queue.size() != x.size()) fail("cluster " + std::to_string(id) + " is not connected");
    for (const auto& [e, d] : dist) {
      rep.max_radius = std::max(rep.max_radius, d);
      if (d > c.s) fail("cluster " + std::to_string(id) + " has radius above " + std::to_string(c.s));
    }
    for (Elem m : c.members[id])
      if (m >= n || c.cluster_of[m] != id) fail("member list of cluster " + std::to_string(id) + " is inconsistent");
  }
  std::vector<std::size_t> assigned(c.clusters.size(), 0);
  for (Elem e = 0; e < n; ++e) {
    auto id = c.cluster_of[e];
    if (id >= c.clusters.size()) {
      fail("element " + a.name(e) + " has no cluster");
      continue;
    }
    ++assigned[id];
    const auto& x = c.clusters[id];
    Elem centre[] = {e};
    for (Elem w : a.ball(centre, c.r))
      if (!std::binary_search(x.begin(), x.end(), w)) {
        fail("the " + std::to_string(c.r) + "-ball of " + a.name(e) + " is not inside its cluster");
        break;
      }
  }
  for (std::size_t id = 0; id < c.clusters.size(); ++id)
    if (assigned[id] != c.members[id].size()) fail("member list of cluster " + std::to_string(id) + " is incomplete");
  for (Elem e = 0; e < n; ++e) {
    rep.max_degree = std::max(rep.max_degree, degree[e]);
    ++rep.degree_histogram[degree[e]];
  }
  if (rep.total_size > n * rep.max_degree) fail("sum of cluster sizes exceeds n times the maximum degree");
  return rep;
}

Graph gaifman_adjacency(const Structure& a) { return a.adjacency(); }

namespace {

class SplitterSolver {
 public:
  SplitterSolver(const Graph& g, std::int64_t r) : n_(g.size()), r_(r), adj_(g.size(), 0) {
    for (Elem v = 0; v < n_; ++v)
      for (Elem w : g[v]) adj_[v] |= 1u << w;
    if (n_ <= kDense) {
      dense_value_.assign(std::size_t(1) << n_, -1);
      dense_move_.assign(n_ << n_, 0);
    }
  }

  // r-ball of a inside the subgraph induced by mask.
  std::uint32_t ball(std::uint32_t mask, Elem a) const {
    std::uint32_t seen = 1u << a, frontier = seen;
    for (std::int64_t d = 0; d < r_ && frontier; ++d) {
      std::uint32_t next = 0;
      for (std::uint32_t f = frontier; f; f &= f - 1) next |= adj_[std::countr_zero(f)];
      frontier = next & mask & ~seen;
      seen |= frontier;
    }
    return seen;
  }

  // Least rounds for Splitter to empty the graph induced by mask.
  int value(std::uint32_t mask) {
    if (mask == 0) return 0;
    if (n_ <= kDense) {
      if (dense_value_[mask] >= 0) return dense_value_[mask];
    } else if (auto it = memo_.find(mask); it != memo_.end()) {
      return it->second;
    }
    int worst = 0;
    for (std::uint32_t m = mask; m; m &= m - 1) {
      Elem a = static_cast<Elem>(std::countr_zero(m));
      std::uint32_t b_set = ball(mask, a);
      int best = INT32_MAX;
      Elem best_b = a;
      for (std::uint32_t bs = b_set; bs; bs &= bs - 1) {
        Elem b = static_cast<Elem>(std::countr_zero(bs));
        int v = 1 + value(b_set & ~(1u << b));
        if (v < best) {
          best = v;
          best_b = b;
          if (best == 1) break;
        }
      }
      if (n_ <= kDense)
        dense_move_[(std::size_t(mask) * n_) + a] = static_cast<std::uint8_t>(best_b);
      else
        moves_[(std::uint64_t(mask) << 5) | a] = best_b;
      worst = std::max(worst, best);
    }
    if (n_ <= kDense)
      dense_value_[mask] = static_cast<std::int8_t>(worst);
    else
      memo_[mask] = worst;
    return worst;
  }

  Elem move(std::uint32_t mask, Elem a) {
    value(mask);
    if (n_ <= kDense) return dense_move_[(std::size_t(mask) * n_) + a];
    return moves_.at((std::uint64_t(mask) << 5) | a);
  }

  // Strategy restricted to positions reachable under optimal Splitter play.
  void collect(std::uint32_t mask, std::map<std::pair<std::uint32_t, Elem>, Elem>& out) {
    if (mask == 0) return;
    for (Elem a = 0; a < n_; ++a) {
      if (!(mask >> a & 1) || out.count({mask, a})) continue;
      Elem b = move(mask, a);
      out[{mask, a}] = b;
      collect(ball(mask, a) & ~(1u << b), out);
    }
  }

 private:
  static constexpr std::size_t kDense = 20;
  std::size_t n_;
  std::int64_t r_;
  std::vector<std::uint32_t> adj_;
  std::vector<std::int8_t> dense_value_;
  std::vector<std::uint8_t> dense_move_;
  std::unordered_map<std::uint32_t, int> memo_;
  std::unordered_map<std::uint64_t, Elem> moves_;
};

}  // namespace

GameValue solve_splitter(const Graph& g, std::int64_t r, int max_rounds, std::size_t cap) {
  if (g.size() > cap || g.size() > 31)
    throw InputError("exact splitter game search is limited to " + std::to_string(std::min<std::size_t>(cap, 31)) +
                     " vertices (graph has " + std::to_string(g.size()) + ")");
  if (r < 0) throw InputError("game radius must be non-negative");
  GameValue out;
  out.r = r;
  out.max_rounds = max_rounds;
  if (g.empty()) {
    out.value = 0;
    return out;
  }
  SplitterSolver s(g, r);
  std::uint32_t all = g.size() == 32 ? UINT32_MAX : (1u << g.size()) - 1;
  int v = s.value(all);
  if (v <= max_rounds) {
    out.value = v;
    s.collect(all, out.strategy);
  }
  return out;
}

Elem splitter_move(const Graph& g, Elem a, std::int64_t r, std::size_t cap) {
  std::size_t n = g.size();
  if (a >= n) throw InputError("vertex out of range");
  if (n <= cap && n <= 31) {
    SplitterSolver s(g, r);
    return s.move((1u << n) - 1, a);
  }
  // r-ball of a
  std::unordered_map<Elem, std::int64_t> ball{{a, 0}};
  std::vector<Elem> queue{a};
  for (std::size_t h = 0; h < queue.size(); ++h) {
    Elem v = queue[h];
    if (ball[v] >= r) continue;
    for (Elem w : g[v])
      if (ball.emplace(w, ball[v] + 1).second) queue.push_back(w);
  }
  // Forest test on the component of a.
  std::vector<Elem> comp{a};
  std::unordered_map<Elem, bool> in{{a, true}};
  std::size_t degree_sum = 0;
  for (std::size_t h = 0; h < comp.size(); ++h)
    for (Elem w : g[comp[h]]) {
      ++degree_sum;
      if (in.emplace(w, true).second) comp.push_back(w);
    }
  bool tree = degree_sum / 2 + 1 == comp.size();
  if (tree) {
    // Centre of the tree by repeated leaf removal.
    std::unordered_map<Elem, std::size_t> deg;
    std::vector<Elem> layer;
    for (Elem v : comp) {
      deg[v] = g[v].size();
      if (deg[v] <= 1) layer.push_back(v);
    }
    std::size_t left = comp.size();
    while (left > 2) {
      left -= layer.size();
      std::vector<Elem> next;
      for (Elem v : layer)
        for (Elem w : g[v])
          if (--deg[w] == 1) next.push_back(w);
      layer = std::move(next);
    }
    Elem root = *std::min_element(layer.begin(), layer.end());
    std::unordered_map<Elem, std::int64_t> depth{{root, 0}};
    std::vector<Elem> q{root};
    for (std::size_t h = 0; h < q.size(); ++h)
      for (Elem w : g[q[h]])
        if (depth.emplace(w, depth[q[h]] + 1).second) q.push_back(w);
    Elem best = a;
    for (const auto& [v, d] : ball)
      if (depth[v] < depth[best] || (depth[v] == depth[best] && v < best)) best = v;
    return best;
  }
  Elem best = a;
  for (const auto& [v, d] : ball)
    if (g[v].size() > g[best].size() || (g[v].size() == g[best].size() && v < best)) best = v;
  return best;
}

}  // namespace focq
