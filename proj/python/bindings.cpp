#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "focq/covers.hpp"
#include "focq/io.hpp"
#include "focq/localized.hpp"
#include "focq/parser.hpp"
#include "focq/reductions.hpp"
#include "focq/removal.hpp"

namespace py = pybind11;
using namespace focq;

namespace {

py::int_ to_py(const Int& v) { return py::reinterpret_steal<py::int_>(PyLong_FromString(v.str().c_str(), nullptr, 10)); }

Structure load(const std::string& json) {
  try {
    return structure_from_json(Json::parse(json));
  } catch (const Json::parse_error& e) {
    throw InputError(e.what());
  }
}

Signature signature_of(const std::map<std::string, int>& sig) {
  Signature s;
  for (const auto& [name, arity] : sig) s.add(name, arity);
  return s;
}

py::object evaluate_text(const std::string& text, const std::string& structure_json, const std::string& mode,
                         std::size_t threshold, int recursion_cap) {
  if (mode != "naive" && mode != "local") throw InputError("mode must be naive or local");
  Structure a = load(structure_json);
  auto reg = PredicateRegistry::with_builtins();
  LocalizedConfig cfg;
  cfg.threshold = threshold;
  cfg.recursion_cap = recursion_cap;
  auto parsed = parse(text, a.signature(), reg);
  if (auto* q = std::get_if<Query>(&parsed)) {
    QueryResult res;
    {
      py::gil_scoped_release nogil;
      res = mode == "naive" ? eval_query(*q, a, reg) : evaluate_query(*q, a, reg, cfg);
    }
    py::list rows;
    for (const auto& row : res.rows) {
      py::list r;
      for (Elem e : row.elems) r.append(a.name(e));
      for (const auto& v : row.values) r.append(to_py(v));
      rows.append(py::tuple(r));
    }
    return std::move(rows);
  }
  Expr xi = std::get<Expr>(parsed);
  if (!free_vars(xi).empty()) throw InputError("an expression with free variables needs a query head");
  bool term = xi->is_term();
  Int v;
  bool truth = false;
  {
    py::gil_scoped_release nogil;
    if (mode == "naive") {
      if (term)
        v = value(a, reg, xi);
      else
        truth = holds(a, reg, xi);
    } else {
      auto out = evaluate(xi, a, reg, cfg);
      v = out.value.value;
      truth = out.value.truth;
    }
  }
  if (term) return to_py(v);
  return py::bool_(truth);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Counting first-order evaluation over sparse structures";
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);

  m.def("evaluate", &evaluate_text, py::arg("text"), py::arg("structure"), py::arg("mode") = "local",
        py::arg("threshold") = LocalizedConfig{}.threshold, py::arg("recursion_cap") = LocalizedConfig{}.recursion_cap);

  m.def(
      "generate",
      [](const std::string& family, std::size_t n, std::uint64_t seed, const std::vector<std::string>& unary,
         double p) {
        Rng rng(seed);
        Structure a = family_graph(parse_family(family), n, rng);
        if (!unary.empty()) a = with_random_unary(a, unary, p, rng);
        return structure_to_json(a).dump();
      },
      py::arg("family"), py::arg("n"), py::arg("seed") = 1, py::arg("unary") = std::vector<std::string>{},
      py::arg("p") = 0.4);

  m.def(
      "decompose",
      [](const std::string& text, const std::map<std::string, int>& sig) {
        Signature s = signature_of(sig);
        auto reg = PredicateRegistry::with_builtins();
        return decomposition_to_json(cl_decompose(parse_expr(text, s, reg), s)).dump();
      },
      py::arg("text"), py::arg("signature"));

  m.def(
      "cover",
      [](const std::string& structure_json, std::int64_t r) {
        Structure a = load(structure_json);
        Cover c = build_cover(a, r);
        return cover_to_json(a, c, validate_cover(a, c)).dump();
      },
      py::arg("structure"), py::arg("r"));

  m.def(
      "splitter_game",
      [](std::size_t n, const std::vector<std::pair<Elem, Elem>>& edges, std::int64_t r, int max_rounds) {
        Graph g(n);
        for (auto [u, v] : edges) {
          if (u >= n || v >= n) throw InputError("edge endpoint out of range");
          if (u == v) continue;
          g[u].push_back(v);
          g[v].push_back(u);
        }
        for (auto& adj : g) {
          std::sort(adj.begin(), adj.end());
          adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
        }
        return game_to_json(solve_splitter(g, r, max_rounds > 0 ? max_rounds : static_cast<int>(n))).dump();
      },
      py::arg("n"), py::arg("edges"), py::arg("radius"), py::arg("max_rounds") = 0);

  m.def(
      "remove",
      [](const std::string& structure_json, const std::string& element, int r) {
        Structure a = load(structure_json);
        auto e = a.find(element);
        if (!e) throw InputError("no element named " + element);
        return structure_to_json(remove(a, *e, r).structure).dump();
      },
      py::arg("structure"), py::arg("element"), py::arg("r"));

  m.def(
      "transform",
      [](const std::string& text, const std::map<std::string, int>& sig, const std::vector<std::string>& vars, int r) {
        auto reg = PredicateRegistry::with_builtins();
        VarSet V;
        for (const auto& v : vars) V.insert(Var(v));
        return render(removal_formula(parse_expr(text, signature_of(sig), reg), V, r));
      },
      py::arg("text"), py::arg("signature"), py::arg("vars"), py::arg("r"));

  m.def(
      "encode_tree",
      [](std::size_t n, const std::vector<std::pair<Elem, Elem>>& edges) {
        std::vector<Edge> es;
        for (auto [u, v] : edges) es.push_back({u, v});
        auto enc = encode_tree(n, es);
        return py::make_tuple(structure_to_json(enc.tree).dump(), enc.height);
      },
      py::arg("n"), py::arg("edges"));

  m.def(
      "rewrite_tree_formula",
      [](const std::string& text) {
        auto reg = PredicateRegistry::with_builtins();
        return render(rewrite_tree_formula(parse_expr(text, Signature{{"E", 2}}, reg)));
      },
      py::arg("text"));
}
