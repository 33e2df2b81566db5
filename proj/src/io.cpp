#include "focq/io.hpp"

#include <fstream>
#include <sstream>

namespace focq {

Json structure_to_json(const Structure& a) {
  Json j;
  j["universe"] = a.names();
  Json rels = Json::object();
  for (std::size_t r = 0; r < a.signature().size(); ++r) {
    const auto& s = a.signature().symbols()[r];
    Json ts = Json::array();
    for (const auto& t : a.relation_at(r).tuples()) {
      Json tj = Json::array();
      for (Elem e : t) tj.push_back(a.name(e));
      ts.push_back(std::move(tj));
    }
    rels[s.name] = {{"arity", s.arity}, {"tuples", std::move(ts)}};
  }
  j["relations"] = std::move(rels);
  return j;
}

Structure structure_from_json(const Json& j) {
  try {
    if (!j.is_object() || !j.contains("universe")) throw InputError("structure JSON needs a \"universe\" array");
    std::vector<std::string> universe = j.at("universe").get<std::vector<std::string>>();
    Signature sig;
    std::vector<RelationData> rels;
    if (j.contains("relations")) {
      for (const auto& [name, r] : j.at("relations").items()) {
        int arity = r.at("arity").get<int>();
        if (arity < 0) throw InputError("relation " + name + " has negative arity");
        RelationData rd{name, arity, {}};
        for (const auto& t : r.at("tuples")) {
          auto tuple = t.get<std::vector<std::string>>();
          if (static_cast<int>(tuple.size()) != arity)
            throw InputError("tuple of relation " + name + " has the wrong length");
          rd.tuples.push_back(std::move(tuple));
        }
        sig.add(name, arity);
        rels.push_back(std::move(rd));
      }
    }
    return Structure(sig, std::move(universe), rels);
  } catch (const Json::exception& e) {
    throw InputError(std::string("malformed structure JSON: ") + e.what());
  }
}

GraphFile graph_from_json(const Json& j) {
  try {
    GraphFile g;
    g.n = j.at("n").get<std::size_t>();
    for (const auto& e : j.at("edges")) {
      auto p = e.get<std::vector<std::size_t>>();
      if (p.size() != 2 || p[0] < 1 || p[1] < 1 || p[0] > g.n || p[1] > g.n)
        throw InputError("graph edges must be pairs of vertices in 1..n");
      g.edges.push_back({Elem(p[0] - 1), Elem(p[1] - 1)});
    }
    return g;
  } catch (const Json::exception& e) {
    throw InputError(std::string("malformed graph JSON: ") + e.what());
  }
}

Json graph_to_json(std::size_t n, const std::vector<Edge>& edges) {
  Json es = Json::array();
  for (auto [u, v] : edges) es.push_back({u + 1, v + 1});
  return {{"n", n}, {"edges", es}};
}

namespace {

Json poly_json(const ClPolynomial& p, Var z) {
  Json basics = Json::array();
  for (const auto& b : p.basics())
    basics.push_back({{"kind", b->unary ? "unary" : "ground"},
                      {"width", b->k},
                      {"radius", b->r},
                      {"pattern", b->g.to_string()},
                      {"psi", render(b->psi)},
                      {"term", render(b->to_expr(z))}});
  return {{"expression", p.render(z)}, {"radius", p.radius()}, {"width", p.width()}, {"basics", basics}};
}

}  // namespace

Json decomposition_to_json(const ClDecomposition& d) {
  Var z("z");
  Json layers = Json::array();
  for (const auto& layer : d.layers) {
    Json syms = Json::array();
    for (const auto& s : layer.symbols) {
      Json args = Json::array();
      for (const auto& a : s.args) args.push_back(poly_json(a, z));
      syms.push_back({{"symbol", s.name},
                      {"arity", s.arity},
                      {"definition", render(s.definition())},
                      {"guard", render(s.guard)},
                      {"predicate", s.pred},
                      {"arguments", args}});
    }
    layers.push_back({{"symbols", syms}});
  }
  Json j{{"kind", d.is_term ? "term" : "sentence"},
         {"depth", d.depth()},
         {"max_radius", d.max_radius()},
         {"max_width", d.max_width()},
         {"layers", layers}};
  if (d.is_term)
    j["final"] = poly_json(d.final_term, z);
  else
    j["final"] = render(d.final_formula);
  return j;
}

Json cover_to_json(const Structure& a, const Cover& c, const CoverReport& rep) {
  Json clusters = Json::array();
  for (std::size_t i = 0; i < c.clusters.size(); ++i) {
    Json els = Json::array(), mem = Json::array();
    for (Elem e : c.clusters[i]) els.push_back(a.name(e));
    for (Elem e : c.members[i]) mem.push_back(a.name(e));
    clusters.push_back({{"centre", a.name(c.centre[i])}, {"elements", els}, {"members", mem}});
  }
  Json hist = Json::object();
  for (auto [deg, cnt] : rep.degree_histogram) hist[std::to_string(deg)] = cnt;
  return {{"r", c.r},
          {"s", c.s},
          {"valid", rep.ok},
          {"violations", rep.violations},
          {"clusters", clusters},
          {"centres", [&] {
             Json cs = Json::array();
             for (Elem e : c.centre) cs.push_back(a.name(e));
             return cs;
           }()},
          {"max_degree", rep.max_degree},
          {"total_size", rep.total_size},
          {"max_radius", rep.max_radius},
          {"degree_histogram", hist}};
}

Json game_to_json(const GameValue& g) {
  Json strat = Json::array();
  for (const auto& [pos, b] : g.strategy) {
    Json rem = Json::array();
    for (Elem v = 0; v < 32; ++v)
      if (pos.first >> v & 1) rem.push_back(v + 1);
    strat.push_back({{"remaining", rem}, {"connector", pos.second + 1}, {"splitter", b + 1}});
  }
  Json j{{"radius", g.r}, {"max_rounds", g.max_rounds}};
  if (g.value)
    j["value"] = *g.value;
  else
    j["value"] = nullptr;
  j["splitter_wins"] = g.value.has_value();
  j["strategy"] = strat;
  return j;
}

Json report_to_json(const LocalizedReport& rep) {
  Json hist = Json::object();
  for (auto [d, c] : rep.depth_histogram) hist[std::to_string(d)] = c;
  Json reasons = Json::object();
  for (const auto& [r, c] : rep.fallback_reasons) reasons[r] = c;
  return {{"depth_histogram", hist},
          {"max_depth", rep.max_depth},
          {"covers", rep.covers},
          {"clusters", rep.clusters},
          {"largest_cluster", rep.largest_cluster},
          {"removals", rep.removals},
          {"direct_evaluations", rep.direct_evaluations},
          {"direct_elements", rep.direct_elements},
          {"cap_hits", rep.cap_hits},
          {"fallback", rep.fallbacks > 0},
          {"fallbacks", rep.fallbacks},
          {"fallback_reasons", reasons}};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

Json read_json(const std::string& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

Structure read_structure(const std::string& path) { return structure_from_json(read_json(path)); }

}  // namespace focq
