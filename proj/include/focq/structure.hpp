#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "focq/core.hpp"

namespace focq {

using Elem = std::uint32_t;
using Tuple = std::vector<Elem>;

struct RelationSymbol {
  std::string name;
  int arity = 0;
  bool operator==(const RelationSymbol&) const = default;
};

class Signature {
 public:
  Signature() = default;
  Signature(std::initializer_list<RelationSymbol> symbols);
  explicit Signature(std::vector<RelationSymbol> symbols);

  void add(const std::string& name, int arity);
  bool contains(std::string_view name) const { return index_.count(name) != 0; }
  std::optional<int> arity_of(std::string_view name) const;
  int arity(std::string_view name) const;
  const std::vector<RelationSymbol>& symbols() const { return symbols_; }
  std::size_t size() const { return symbols_.size(); }
  std::optional<std::size_t> position(std::string_view name) const;
  bool subset_of(const Signature& other) const;

 private:
  std::vector<RelationSymbol> symbols_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

struct TupleHash {
  std::size_t operator()(const Tuple& t) const noexcept;
};

class Relation {
 public:
  Relation(int arity, std::vector<Tuple> tuples, std::size_t universe_size);

  int arity() const { return arity_; }
  const std::vector<Tuple>& tuples() const { return tuples_; }
  std::size_t size() const { return tuples_.size(); }
  bool contains(const Elem* args) const;
  bool contains(const Tuple& t) const { return contains(t.data()); }

 private:
  int arity_;
  std::size_t n_;
  std::vector<Tuple> tuples_;
  std::vector<std::uint64_t> bits_;
  std::unordered_set<Tuple, TupleHash> set_;
};

// Shortest-path distance with a distinguished infinite value.
class Distance {
 public:
  constexpr Distance() = default;
  constexpr explicit Distance(std::uint32_t d) : finite_(true), d_(d) {}
  static constexpr Distance infinity() { return Distance(); }

  constexpr bool is_finite() const { return finite_; }
  std::uint32_t value() const;
  constexpr bool within(std::int64_t r) const { return finite_ && r >= 0 && d_ <= r; }

  friend constexpr bool operator==(Distance a, Distance b) {
    return a.finite_ == b.finite_ && (!a.finite_ || a.d_ == b.d_);
  }
  friend constexpr std::strong_ordering operator<=>(Distance a, Distance b) {
    if (!a.finite_ || !b.finite_) return b.finite_ <=> a.finite_;
    return a.d_ <=> b.d_;
  }
  std::string to_string() const;

 private:
  bool finite_ = false;
  std::uint32_t d_ = 0;
};

// Undirected graph on [k] describing the distance pattern of a k-tuple.
// Vertices are 0-based internally and rendered 1-based.
class PatternGraph {
 public:
  static constexpr int kMaxVertices = 8;

  PatternGraph() = default;
  explicit PatternGraph(int k, std::uint32_t mask = 0);

  static int pair_index(int i, int j);
  static std::vector<PatternGraph> all(int k);
  static PatternGraph complete(int k);

  int k() const { return k_; }
  std::uint32_t mask() const { return mask_; }
  bool has_edge(int i, int j) const;
  void add_edge(int i, int j);
  int edge_count() const;
  bool connected() const;
  std::vector<std::vector<int>> components() const;
  std::vector<int> component_of(int v) const;
  PatternGraph induced(const std::vector<int>& vertices) const;
  std::string to_string() const;

  bool operator==(const PatternGraph&) const = default;
  auto operator<=>(const PatternGraph&) const = default;

 private:
  int k_ = 0;
  std::uint32_t mask_ = 0;
};

struct GaifmanGraph {
  std::vector<std::vector<Elem>> adjacency;
  std::size_t edge_count() const;
};

struct RelationData {
  std::string name;
  int arity = 0;
  std::vector<std::vector<std::string>> tuples;
};

class Structure {
 public:
  // Builds a structure from element names; the universe is stored in
  // lexicographic order and tuples are remapped accordingly.
  Structure(Signature sig, std::vector<std::string> universe,
            const std::vector<RelationData>& relations);

  // Trusted constructor: names already sorted and unique, tuples already
  // index-based and in range. Used by derived-structure operations.
  static Structure from_sorted(Signature sig, std::vector<std::string> names,
                               std::vector<std::vector<Tuple>> tuples);

  const Signature& signature() const { return sig_; }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(Elem e) const { return names_.at(e); }
  std::optional<Elem> find(std::string_view name) const;
  Elem element(std::string_view name) const;

  const Relation& relation(std::string_view name) const;
  const Relation& relation_at(std::size_t i) const { return relations_[i]; }
  const std::vector<std::vector<Elem>>& adjacency() const { return adj_; }
  const std::vector<Elem>& neighbours(Elem e) const { return adj_[e]; }
  // Tuples (relation index, tuple index) whose first entry is e.
  const std::vector<std::pair<std::uint32_t, std::uint32_t>>& tuples_starting_at(Elem e) const {
    return by_first_[e];
  }

  // ||A|| = |A| + sum of relation sizes (reporting only).
  std::size_t encoding_size() const;

  Distance dist(Elem a, Elem b) const;
  Distance dist(std::span<const Elem> tuple, Elem b) const;
  // dist(a,b) <= bound, by a bounded bidirectional search on large structures.
  bool within(Elem a, Elem b, std::uint32_t bound) const;
  // Full BFS distances from a source (cached for small structures).
  std::shared_ptr<const std::vector<std::int32_t>> distances_from(Elem a) const;
  // Elements within distance r of some entry, sorted ascending.
  std::vector<Elem> ball(std::span<const Elem> tuple, std::int64_t r) const;

 private:
  Structure() = default;
  void finish();

  struct DistCache;
  Signature sig_;
  std::vector<std::string> names_;
  std::vector<Relation> relations_;
  std::vector<std::vector<Elem>> adj_;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> by_first_;
  std::shared_ptr<DistCache> cache_;
};

// Induced substructure together with the positions of its elements in the
// parent structure.
struct Substructure {
  Structure structure;
  std::vector<Elem> parent;
};

GaifmanGraph gaifman_graph(const Structure& a);
Distance dist(const Structure& a, std::span<const Elem> tuple, Elem b);
std::vector<Elem> ball(const Structure& a, std::span<const Elem> tuple, std::int64_t r);
Substructure induced_sub(const Structure& a, std::vector<Elem> elements);
Structure induced(const Structure& a, std::vector<Elem> elements);
Structure neighborhood(const Structure& a, std::span<const Elem> tuple, std::int64_t r);
PatternGraph pattern_graph(const Structure& a, std::span<const Elem> tuple, std::int64_t r);

struct ExtraRelation {
  int arity = 0;
  std::vector<Tuple> tuples;
};
Structure expand(const Structure& a, const std::map<std::string, ExtraRelation>& extra);
Structure reduct(const Structure& a, const Signature& sub);
Structure disjoint_union(const Structure& left, const Structure& right);

}  // namespace focq
