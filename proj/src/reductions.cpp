#include "focq/reductions.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace focq {

Signature tree_signature() { return Signature{{"E", 2}}; }
Signature string_signature() { return Signature{{"Le", 2}, {"Pa", 1}, {"Pb", 1}, {"Pc", 1}}; }

namespace {

std::vector<std::vector<std::size_t>> neighbour_lists(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::set<std::size_t>> nb(n);
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) throw InputError("edge endpoint out of range");
    if (u == v) throw InputError("graphs for the encodings have no loops");
    nb[u].insert(v);
    nb[v].insert(u);
  }
  std::vector<std::vector<std::size_t>> out;
  for (const auto& s : nb) out.emplace_back(s.begin(), s.end());
  return out;
}

void collect_vars(const Expr& e, VarSet& out) {
  out.insert(e->vars.begin(), e->vars.end());
  for (const auto& k : e->kids) collect_vars(k, out);
}

// Deterministic fresh bound variables.
class Fresh {
 public:
  explicit Fresh(VarSet avoid) : avoid_(std::move(avoid)) {}
  Var operator()() {
    Var v = fresh_var("u", avoid_);
    avoid_.insert(v);
    return v;
  }

 private:
  VarSet avoid_;
};

Expr E(Var a, Var b) { return mk_atom("E", {a, b}); }

Expr degree_one(Var x, Fresh& f) {
  Var u = f(), v = f();
  return mk_exists(u, mk_and(E(x, u), mk_forall(v, mk_implies(E(x, v), mk_eq(v, u)))));
}

Expr degree_two(Var x, Fresh& f) {
  Var u = f(), v = f(), w = f();
  Expr only = mk_forall(w, mk_implies(E(x, w), mk_or(mk_eq(w, u), mk_eq(w, v))));
  return mk_exists(u, mk_exists(v, conj_all({mk_not(mk_eq(u, v)), E(x, u), E(x, v), only})));
}

Expr role(char r, Var x, Fresh& f) {
  switch (r) {
    case 'c': {
      Var u = f();
      return mk_and(degree_one(x, f), mk_exists(u, mk_and(E(x, u), degree_two(u, f))));
    }
    case 'b': {
      Var u = f();
      return mk_exists(u, mk_and(E(x, u), role('c', u, f)));
    }
    case 'a': {
      Var u = f();
      return mk_and(mk_not(role('c', x, f)), mk_exists(u, mk_and(E(x, u), role('b', u, f))));
    }
    case 'e': {
      // The root of a one-vertex graph also has degree one; it is adjacent
      // to an a-vertex.
      Var u = f();
      return conj_all({degree_one(x, f), mk_not(role('c', x, f)),
                       mk_not(mk_exists(u, mk_and(E(x, u), role('a', u, f))))});
    }
    case 'd': {
      Var u = f();
      return mk_exists(u, mk_and(E(x, u), role('e', u, f)));
    }
    case 'r': {
      Var u = f();
      return conj_all({mk_not(role('a', x, f)), mk_not(role('b', x, f)), mk_not(role('d', x, f)),
                       mk_forall(u, mk_implies(role('a', u, f), E(x, u)))});
    }
    default:
      throw InputError(std::string("unknown tree role '") + r + "'");
  }
}

template <class EdgeFn, class DomainFn>
Expr rewrite(const Expr& f, EdgeFn edge, DomainFn domain) {
  switch (f->kind) {
    case Kind::True:
    case Kind::False:
    case Kind::Eq:
      return f;
    case Kind::Atom:
      if (f->name != "E" || f->vars.size() != 2)
        throw InputError("graph sentences may only use the binary relation E: " + render(f));
      return edge(f->vars[0], f->vars[1]);
    case Kind::Not:
      return mk_not(rewrite(f->kids[0], edge, domain));
    case Kind::Or:
      return mk_or(rewrite(f->kids[0], edge, domain), rewrite(f->kids[1], edge, domain));
    case Kind::Exists:
      return mk_exists(f->vars[0], mk_and(domain(f->vars[0]), rewrite(f->kids[0], edge, domain)));
    default:
      throw InputError("graph sentences must be first-order: " + render(f));
  }
}

}  // namespace

TreeEncoding encode_tree(std::size_t n, const std::vector<Edge>& edges) {
  if (n == 0) throw InputError("the graph must have at least one vertex");
  auto nb = neighbour_lists(n, edges);
  std::vector<std::pair<std::string, char>> verts{{"r", 'r'}};
  std::vector<std::pair<std::string, std::string>> es;
  auto add = [&](const std::string& name, char role) { verts.push_back({name, role}); };
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t i = v + 1;
    std::string a = "a" + std::to_string(i);
    add(a, 'a');
    es.push_back({"r", a});
    for (std::size_t j = 1; j <= i + 1; ++j) {
      std::string b = "b" + std::to_string(i) + "_" + std::to_string(j);
      std::string c = "c" + std::to_string(i) + "_" + std::to_string(j);
      add(b, 'b');
      add(c, 'c');
      es.push_back({a, b});
      es.push_back({b, c});
    }
    for (std::size_t w : nb[v]) {
      std::size_t j = w + 1;
      std::string d = "d" + std::to_string(i) + "_" + std::to_string(j);
      add(d, 'd');
      es.push_back({a, d});
      for (std::size_t k = 1; k <= j + 1; ++k) {
        std::string e = "e" + std::to_string(i) + "_" + std::to_string(j) + "_" + std::to_string(k);
        add(e, 'e');
        es.push_back({d, e});
      }
    }
  }
  std::vector<std::string> names;
  for (const auto& [name, r] : verts) names.push_back(name);
  RelationData rel{"E", 2, {}};
  for (const auto& [u, v] : es) {
    rel.tuples.push_back({u, v});
    rel.tuples.push_back({v, u});
  }
  TreeEncoding out{Structure(tree_signature(), names, {rel}), {}, 0};
  out.roles.resize(out.tree.size());
  for (const auto& [name, r] : verts) out.roles[out.tree.element(name)] = r;
  Elem root = out.tree.element("r");
  auto dist = out.tree.distances_from(root);
  for (auto d : *dist) out.height = std::max(out.height, static_cast<int>(d));
  return out;
}

Expr tree_role_formula(char r, Var x) {
  Fresh f({x});
  return role(r, x, f);
}

Expr rewrite_tree_formula(const Expr& phi) {
  VarSet used;
  collect_vars(phi, used);
  Fresh f(used);
  auto edge = [&](Var x, Var x2) {
    Var y = f(), z = f(), z2 = f();
    Expr es = mk_count({z}, mk_and(E(y, z), role('e', z, f)));
    Expr bs = mk_count({z2}, mk_and(E(x2, z2), role('b', z2, f)));
    return mk_exists(y, mk_and(E(x, y), mk_pred("eq", {es, bs})));
  };
  auto domain = [&](Var x) { return role('a', x, f); };
  return rewrite(phi, edge, domain);
}

StringEncoding encode_string(std::size_t n, const std::vector<Edge>& edges) {
  if (n == 0) throw InputError("the graph must have at least one vertex");
  auto nb = neighbour_lists(n, edges);
  std::string w;
  for (std::size_t v = 0; v < n; ++v) {
    w += 'a';
    w += std::string(v + 1, 'c');
    for (std::size_t u : nb[v]) {
      w += 'b';
      w += std::string(u + 1, 'c');
    }
  }
  std::size_t len = w.size();
  auto names = numbered_names(len, "p");
  Signature sig = string_signature();
  std::vector<std::vector<Tuple>> tuples(4);
  tuples[0].reserve(len * (len + 1) / 2);
  for (Elem i = 0; i < len; ++i)
    for (Elem j = i; j < len; ++j) tuples[0].push_back({i, j});
  for (Elem i = 0; i < len; ++i) tuples[w[i] == 'a' ? 1 : w[i] == 'b' ? 2 : 3].push_back({i});
  return {Structure::from_sorted(sig, names, std::move(tuples)), w};
}

Expr rewrite_string_formula(const Expr& phi) {
  VarSet used;
  collect_vars(phi, used);
  Fresh f(used);
  auto lt = [](Var p, Var q) { return mk_and(mk_atom("Le", {p, q}), mk_not(mk_eq(p, q))); };
  // Length of the run of c's right after position p.
  auto run = [&](Var p) {
    Var z = f(), w = f();
    Expr gap = mk_exists(w, conj_all({lt(p, w), lt(w, z), mk_not(mk_atom("Pc", {w}))}));
    return mk_count({z}, conj_all({mk_atom("Pc", {z}), lt(p, z), mk_not(gap)}));
  };
  auto edge = [&](Var x, Var x2) {
    Var y = f(), w = f();
    Expr same_block = mk_not(mk_exists(w, conj_all({lt(x, w), lt(w, y), mk_atom("Pa", {w})})));
    return mk_exists(y, conj_all({mk_atom("Pb", {y}), lt(x, y), same_block, mk_pred("eq", {run(y), run(x2)})}));
  };
  auto domain = [](Var x) { return mk_atom("Pa", {x}); };
  return rewrite(phi, edge, domain);
}

}  // namespace focq
