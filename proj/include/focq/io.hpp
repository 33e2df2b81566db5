#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "focq/covers.hpp"
#include "focq/decompose.hpp"
#include "focq/generators.hpp"
#include "focq/localized.hpp"
#include "focq/structure.hpp"

namespace focq {

using Json = nlohmann::ordered_json;

// {"universe": [...], "relations": {"E": {"arity": 2, "tuples": [[..], ..]}}}
Json structure_to_json(const Structure& a);
Structure structure_from_json(const Json& j);

// {"n": N, "edges": [[i, j], ...]} with vertices 1..N.
struct GraphFile {
  std::size_t n = 0;
  std::vector<Edge> edges;  // 0-based
};
GraphFile graph_from_json(const Json& j);
Json graph_to_json(std::size_t n, const std::vector<Edge>& edges);

Json decomposition_to_json(const ClDecomposition& d);
Json cover_to_json(const Structure& a, const Cover& c, const CoverReport& rep);
Json game_to_json(const GameValue& g);
Json report_to_json(const LocalizedReport& rep);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);
Json read_json(const std::string& path);
Structure read_structure(const std::string& path);

}  // namespace focq
