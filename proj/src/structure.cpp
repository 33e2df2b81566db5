#include "focq/structure.hpp"

#include <algorithm>
#include <deque>
#include <mutex>
#include <numeric>
#include <unordered_map>

namespace focq {

// ---------------------------------------------------------------- Signature

Signature::Signature(std::initializer_list<RelationSymbol> symbols)
    : Signature(std::vector<RelationSymbol>(symbols)) {}

Signature::Signature(std::vector<RelationSymbol> symbols) {
  for (auto& s : symbols) add(s.name, s.arity);
}

void Signature::add(const std::string& name, int arity) {
  if (name.empty()) throw InputError("empty relation name");
  if (arity < 0) throw InputError("negative arity for relation " + name);
  if (contains(name)) throw InputError("duplicate relation symbol " + name);
  index_.emplace(name, symbols_.size());
  symbols_.push_back({name, arity});
}

std::optional<int> Signature::arity_of(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return symbols_[it->second].arity;
}

int Signature::arity(std::string_view name) const {
  auto a = arity_of(name);
  if (!a) throw InputError("unknown relation symbol " + std::string(name));
  return *a;
}

std::optional<std::size_t> Signature::position(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Signature::subset_of(const Signature& other) const {
  for (const auto& s : symbols_) {
    auto a = other.arity_of(s.name);
    if (!a || *a != s.arity) return false;
  }
  return true;
}

// ----------------------------------------------------------------- Relation

std::size_t TupleHash::operator()(const Tuple& t) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (Elem e : t) {
    h ^= e + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

namespace {
constexpr std::size_t kDenseLimit = std::size_t(1) << 24;
}

Relation::Relation(int arity, std::vector<Tuple> tuples, std::size_t universe_size)
    : arity_(arity), n_(universe_size), tuples_(std::move(tuples)) {
  std::sort(tuples_.begin(), tuples_.end());
  tuples_.erase(std::unique(tuples_.begin(), tuples_.end()), tuples_.end());
  if (arity_ == 0) return;
  std::size_t cells = arity_ == 1 ? n_ : (arity_ == 2 && n_ <= (1u << 10) ? n_ * n_ : 0);
  if (cells > 0 && cells <= kDenseLimit) {
    bits_.assign((cells + 63) / 64, 0);
    for (const auto& t : tuples_) {
      std::size_t idx = arity_ == 1 ? t[0] : std::size_t(t[0]) * n_ + t[1];
      bits_[idx / 64] |= std::uint64_t(1) << (idx % 64);
    }
  } else {
    set_.reserve(tuples_.size());
    for (const auto& t : tuples_) set_.insert(t);
  }
}

bool Relation::contains(const Elem* args) const {
  if (arity_ == 0) return !tuples_.empty();
  if (!bits_.empty()) {
    std::size_t idx = arity_ == 1 ? args[0] : std::size_t(args[0]) * n_ + args[1];
    return (bits_[idx / 64] >> (idx % 64)) & 1u;
  }
  if (set_.empty()) return false;
  return set_.count(Tuple(args, args + arity_)) != 0;
}

// ----------------------------------------------------------------- Distance

std::uint32_t Distance::value() const {
  if (!finite_) throw std::logic_error("value() of infinite distance");
  return d_;
}

std::string Distance::to_string() const {
  return finite_ ? std::to_string(d_) : std::string("inf");
}

// ------------------------------------------------------------- PatternGraph

PatternGraph::PatternGraph(int k, std::uint32_t mask) : k_(k), mask_(mask) {
  if (k < 0 || k > kMaxVertices) throw InputError("pattern graph size out of range");
  int pairs = k * (k - 1) / 2;
  if (pairs < 32 && (mask >> pairs) != 0) throw InputError("pattern mask out of range");
}

int PatternGraph::pair_index(int i, int j) {
  if (i > j) std::swap(i, j);
  return j * (j - 1) / 2 + i;
}

std::vector<PatternGraph> PatternGraph::all(int k) {
  int pairs = k * (k - 1) / 2;
  std::vector<PatternGraph> out;
  out.reserve(std::size_t(1) << pairs);
  for (std::uint32_t m = 0; m < (std::uint32_t(1) << pairs); ++m) out.emplace_back(k, m);
  return out;
}

PatternGraph PatternGraph::complete(int k) {
  int pairs = k * (k - 1) / 2;
  return PatternGraph(k, pairs == 0 ? 0 : (std::uint32_t(1) << pairs) - 1);
}

bool PatternGraph::has_edge(int i, int j) const {
  if (i == j) return false;
  return (mask_ >> pair_index(i, j)) & 1u;
}

void PatternGraph::add_edge(int i, int j) {
  if (i == j) throw InputError("pattern graphs have no self-loops");
  mask_ |= std::uint32_t(1) << pair_index(i, j);
}

int PatternGraph::edge_count() const { return std::popcount(mask_); }

std::vector<int> PatternGraph::component_of(int v) const {
  std::vector<int> seen(k_, 0), out{v};
  seen[v] = 1;
  for (std::size_t h = 0; h < out.size(); ++h) {
    for (int w = 0; w < k_; ++w) {
      if (!seen[w] && has_edge(out[h], w)) {
        seen[w] = 1;
        out.push_back(w);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<int>> PatternGraph::components() const {
  std::vector<std::vector<int>> out;
  std::vector<int> seen(k_, 0);
  for (int v = 0; v < k_; ++v) {
    if (seen[v]) continue;
    auto c = component_of(v);
    for (int w : c) seen[w] = 1;
    out.push_back(std::move(c));
  }
  return out;
}

bool PatternGraph::connected() const {
  return k_ <= 1 || static_cast<int>(component_of(0).size()) == k_;
}

PatternGraph PatternGraph::induced(const std::vector<int>& vertices) const {
  PatternGraph g(static_cast<int>(vertices.size()));
  for (std::size_t i = 0; i < vertices.size(); ++i)
    for (std::size_t j = i + 1; j < vertices.size(); ++j)
      if (has_edge(vertices[i], vertices[j])) g.add_edge(int(i), int(j));
  return g;
}

std::string PatternGraph::to_string() const {
  std::string s = "G" + std::to_string(k_) + "{";
  bool first = true;
  for (int j = 0; j < k_; ++j)
    for (int i = 0; i < j; ++i)
      if (has_edge(i, j)) {
        if (!first) s += ",";
        first = false;
        s += std::to_string(i + 1) + "-" + std::to_string(j + 1);
      }
  return s + "}";
}

std::size_t GaifmanGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& a : adjacency) total += a.size();
  return total / 2;
}

// ---------------------------------------------------------------- Structure

struct Structure::DistCache {
  std::mutex mu;
  std::unordered_map<Elem, std::shared_ptr<const std::vector<std::int32_t>>> rows;
};

namespace {
constexpr std::size_t kCacheElementLimit = 4096;
}

Structure::Structure(Signature sig, std::vector<std::string> universe,
                     const std::vector<RelationData>& relations) {
  if (universe.empty()) throw InputError("structures have a non-empty universe");
  std::vector<std::string> sorted = universe;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InputError("duplicate element identifier in universe");
  std::unordered_map<std::string, Elem> pos;
  pos.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) pos.emplace(sorted[i], Elem(i));

  std::vector<std::vector<Tuple>> tuples(sig.size());
  std::vector<char> given(sig.size(), 0);
  for (const auto& rel : relations) {
    auto p = sig.position(rel.name);
    if (!p) throw InputError("relation " + rel.name + " not in signature");
    if (sig.symbols()[*p].arity != rel.arity)
      throw InputError("arity mismatch for relation " + rel.name);
    if (given[*p]) throw InputError("relation " + rel.name + " given twice");
    given[*p] = 1;
    for (const auto& t : rel.tuples) {
      if (static_cast<int>(t.size()) != rel.arity)
        throw InputError("tuple of wrong length in relation " + rel.name);
      Tuple idx;
      idx.reserve(t.size());
      for (const auto& e : t) {
        auto it = pos.find(e);
        if (it == pos.end()) throw InputError("tuple entry '" + e + "' not in universe");
        idx.push_back(it->second);
      }
      tuples[*p].push_back(std::move(idx));
    }
  }
  *this = from_sorted(std::move(sig), std::move(sorted), std::move(tuples));
}

Structure Structure::from_sorted(Signature sig, std::vector<std::string> names,
                                 std::vector<std::vector<Tuple>> tuples) {
  if (names.empty()) throw InputError("structures have a non-empty universe");
  Structure s;
  s.sig_ = std::move(sig);
  s.names_ = std::move(names);
  s.relations_.reserve(s.sig_.size());
  for (std::size_t i = 0; i < s.sig_.size(); ++i) {
    std::vector<Tuple> ts = i < tuples.size() ? std::move(tuples[i]) : std::vector<Tuple>{};
    s.relations_.emplace_back(s.sig_.symbols()[i].arity, std::move(ts), s.names_.size());
  }
  s.finish();
  return s;
}

void Structure::finish() {
  const std::size_t n = names_.size();
  adj_.assign(n, {});
  by_first_.assign(n, {});
  for (std::size_t r = 0; r < relations_.size(); ++r) {
    const auto& ts = relations_[r].tuples();
    for (std::size_t t = 0; t < ts.size(); ++t) {
      const Tuple& tup = ts[t];
      if (tup.empty()) continue;
      by_first_[tup[0]].emplace_back(std::uint32_t(r), std::uint32_t(t));
      for (std::size_t i = 0; i < tup.size(); ++i)
        for (std::size_t j = i + 1; j < tup.size(); ++j)
          if (tup[i] != tup[j]) {
            adj_[tup[i]].push_back(tup[j]);
            adj_[tup[j]].push_back(tup[i]);
          }
    }
  }
  for (auto& a : adj_) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  cache_ = std::make_shared<DistCache>();
}

std::optional<Elem> Structure::find(std::string_view name) const {
  auto it = std::lower_bound(names_.begin(), names_.end(), name,
                             [](const std::string& a, std::string_view b) { return a < b; });
  if (it == names_.end() || *it != name) return std::nullopt;
  return Elem(it - names_.begin());
}

Elem Structure::element(std::string_view name) const {
  auto e = find(name);
  if (!e) throw InputError("unknown element '" + std::string(name) + "'");
  return *e;
}

const Relation& Structure::relation(std::string_view name) const {
  auto p = sig_.position(name);
  if (!p) throw InputError("unknown relation symbol " + std::string(name));
  return relations_[*p];
}

std::size_t Structure::encoding_size() const {
  std::size_t total = names_.size();
  for (const auto& r : relations_) total += r.size();
  return total;
}

std::shared_ptr<const std::vector<std::int32_t>> Structure::distances_from(Elem a) const {
  if (a >= names_.size()) throw InputError("element index out of range");
  const bool cacheable = names_.size() <= kCacheElementLimit;
  if (cacheable) {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto it = cache_->rows.find(a);
    if (it != cache_->rows.end()) return it->second;
  }
  auto row = std::make_shared<std::vector<std::int32_t>>(names_.size(), -1);
  std::vector<Elem> queue{a};
  (*row)[a] = 0;
  for (std::size_t h = 0; h < queue.size(); ++h) {
    Elem v = queue[h];
    for (Elem w : adj_[v]) {
      if ((*row)[w] < 0) {
        (*row)[w] = (*row)[v] + 1;
        queue.push_back(w);
      }
    }
  }
  if (cacheable) {
    std::lock_guard<std::mutex> lock(cache_->mu);
    cache_->rows.emplace(a, row);
  }
  return row;
}

Distance Structure::dist(Elem a, Elem b) const {
  if (a >= names_.size() || b >= names_.size()) throw InputError("element index out of range");
  if (a == b) return Distance(0);
  if (names_.size() <= kCacheElementLimit) {
    auto row = distances_from(a);
    return (*row)[b] < 0 ? Distance::infinity() : Distance(std::uint32_t((*row)[b]));
  }
  // Large structures: uncached BFS with early exit.
  std::unordered_map<Elem, std::uint32_t> seen{{a, 0}};
  std::vector<Elem> queue{a};
  for (std::size_t h = 0; h < queue.size(); ++h) {
    Elem v = queue[h];
    for (Elem w : adj_[v]) {
      if (seen.emplace(w, seen[v] + 1).second) {
        if (w == b) return Distance(seen[w]);
        queue.push_back(w);
      }
    }
  }
  return Distance::infinity();
}

bool Structure::within(Elem a, Elem b, std::uint32_t bound) const {
  if (a >= names_.size() || b >= names_.size()) throw InputError("element index out of range");
  if (a == b) return true;
  if (names_.size() <= kCacheElementLimit) {
    auto row = distances_from(a);
    return (*row)[b] >= 0 && static_cast<std::uint32_t>((*row)[b]) <= bound;
  }
  std::unordered_map<Elem, std::uint32_t> seen[2];
  std::vector<Elem> frontier[2] = {{a}, {b}};
  seen[0][a] = 0;
  seen[1][b] = 0;
  std::uint32_t depth[2] = {0, 0};
  while (depth[0] + depth[1] < bound) {
    std::size_t work[2] = {0, 0};
    for (int s = 0; s < 2; ++s)
      for (Elem v : frontier[s]) work[s] += adj_[v].size();
    int s = work[0] <= work[1] ? 0 : 1;
    if (frontier[s].empty()) return false;
    std::vector<Elem> next;
    for (Elem v : frontier[s])
      for (Elem w : adj_[v]) {
        if (seen[1 - s].count(w)) return true;
        if (seen[s].emplace(w, depth[s] + 1).second) next.push_back(w);
      }
    frontier[s] = std::move(next);
    ++depth[s];
  }
  return false;
}

Distance Structure::dist(std::span<const Elem> tuple, Elem b) const {
  Distance best = Distance::infinity();
  for (Elem a : tuple) best = std::min(best, dist(a, b));
  return best;
}

std::vector<Elem> Structure::ball(std::span<const Elem> tuple, std::int64_t r) const {
  std::unordered_map<Elem, std::int64_t> depth;
  std::vector<Elem> queue;
  for (Elem a : tuple) {
    if (a >= names_.size()) throw InputError("element index out of range");
    if (depth.emplace(a, 0).second) queue.push_back(a);
  }
  for (std::size_t h = 0; h < queue.size(); ++h) {
    Elem v = queue[h];
    std::int64_t dv = depth[v];
    if (dv >= r) continue;
    for (Elem w : adj_[v])
      if (depth.emplace(w, dv + 1).second) queue.push_back(w);
  }
  std::sort(queue.begin(), queue.end());
  return queue;
}

// --------------------------------------------------------------- operations

GaifmanGraph gaifman_graph(const Structure& a) { return GaifmanGraph{a.adjacency()}; }

Distance dist(const Structure& a, std::span<const Elem> tuple, Elem b) { return a.dist(tuple, b); }

std::vector<Elem> ball(const Structure& a, std::span<const Elem> tuple, std::int64_t r) {
  return a.ball(tuple, r);
}

Substructure induced_sub(const Structure& a, std::vector<Elem> elements) {
  if (elements.empty()) throw InputError("induced substructure on an empty set");
  std::sort(elements.begin(), elements.end());
  elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
  if (elements.back() >= a.size()) throw InputError("element index out of range");
  // Large parents with small subsets: avoid the O(n) table via hashing.
  const bool dense = elements.size() * 8 >= a.size() || a.size() <= 4096;
  std::vector<std::int64_t> local;
  std::unordered_map<Elem, Elem> sparse;
  if (dense) {
    local.assign(a.size(), -1);
    for (std::size_t i = 0; i < elements.size(); ++i) local[elements[i]] = std::int64_t(i);
  } else {
    for (std::size_t i = 0; i < elements.size(); ++i) sparse.emplace(elements[i], Elem(i));
  }
  auto lookup = [&](Elem e) -> std::int64_t {
    if (dense) return local[e];
    auto it = sparse.find(e);
    return it == sparse.end() ? -1 : std::int64_t(it->second);
  };

  const auto& sig = a.signature();
  std::vector<std::vector<Tuple>> tuples(sig.size());
  for (std::size_t r = 0; r < sig.size(); ++r)
    if (sig.symbols()[r].arity == 0) tuples[r] = a.relation_at(r).tuples();
  for (Elem e : elements) {
    for (auto [r, t] : a.tuples_starting_at(e)) {
      const Tuple& tup = a.relation_at(r).tuples()[t];
      Tuple mapped;
      mapped.reserve(tup.size());
      bool inside = true;
      for (Elem x : tup) {
        std::int64_t l = lookup(x);
        if (l < 0) {
          inside = false;
          break;
        }
        mapped.push_back(Elem(l));
      }
      if (inside) tuples[r].push_back(std::move(mapped));
    }
  }
  std::vector<std::string> names;
  names.reserve(elements.size());
  for (Elem e : elements) names.push_back(a.name(e));
  return Substructure{Structure::from_sorted(sig, std::move(names), std::move(tuples)),
                      std::move(elements)};
}

Structure induced(const Structure& a, std::vector<Elem> elements) {
  return induced_sub(a, std::move(elements)).structure;
}

Structure neighborhood(const Structure& a, std::span<const Elem> tuple, std::int64_t r) {
  return induced(a, a.ball(tuple, r));
}

PatternGraph pattern_graph(const Structure& a, std::span<const Elem> tuple, std::int64_t r) {
  const int k = static_cast<int>(tuple.size());
  PatternGraph g(k);
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      if (a.dist(tuple[i], tuple[j]).within(r)) g.add_edge(i, j);
  return g;
}

Structure expand(const Structure& a, const std::map<std::string, ExtraRelation>& extra) {
  Signature sig = a.signature();
  std::vector<std::vector<Tuple>> tuples;
  for (std::size_t r = 0; r < sig.size(); ++r) tuples.push_back(a.relation_at(r).tuples());
  for (const auto& [name, rel] : extra) {
    sig.add(name, rel.arity);
    for (const auto& t : rel.tuples) {
      if (static_cast<int>(t.size()) != rel.arity)
        throw InputError("tuple of wrong length in expansion relation " + name);
      for (Elem e : t)
        if (e >= a.size()) throw InputError("expansion tuple entry out of range");
    }
    tuples.push_back(rel.tuples);
  }
  return Structure::from_sorted(std::move(sig), a.names(), std::move(tuples));
}

Structure reduct(const Structure& a, const Signature& sub) {
  if (!sub.subset_of(a.signature()))
    throw InputError("reduct signature is not contained in the structure's signature");
  std::vector<std::vector<Tuple>> tuples;
  for (const auto& s : sub.symbols()) tuples.push_back(a.relation(s.name).tuples());
  return Structure::from_sorted(sub, a.names(), std::move(tuples));
}

Structure disjoint_union(const Structure& left, const Structure& right) {
  const Signature& sig = left.signature();
  if (!(sig.subset_of(right.signature()) && right.signature().subset_of(sig)))
    throw InputError("disjoint union needs identical signatures");
  // "L:" < "R:" lexicographically, so left elements precede right ones.
  std::vector<std::string> names;
  names.reserve(left.size() + right.size());
  for (const auto& n : left.names()) names.push_back("L:" + n);
  for (const auto& n : right.names()) names.push_back("R:" + n);
  const Elem offset = Elem(left.size());
  std::vector<std::vector<Tuple>> tuples(sig.size());
  for (std::size_t r = 0; r < sig.size(); ++r) {
    const auto& name = sig.symbols()[r].name;
    if (sig.symbols()[r].arity == 0) {
      bool holds = !left.relation(name).tuples().empty() || !right.relation(name).tuples().empty();
      if (holds) tuples[r].push_back({});
      continue;
    }
    tuples[r] = left.relation(name).tuples();
    for (Tuple t : right.relation(name).tuples()) {
      for (auto& e : t) e += offset;
      tuples[r].push_back(std::move(t));
    }
  }
  return Structure::from_sorted(sig, std::move(names), std::move(tuples));
}

}  // namespace focq
