#include "focq/removal.hpp"

#include <algorithm>

#include "focq/cl.hpp"

namespace focq {

std::string removal_symbol(const std::string& rel, const std::vector<int>& positions) {
  std::string s = rel + "$";
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (i) s += "_";
    s += std::to_string(positions[i]);
  }
  return s;
}

std::string halo_symbol(int i) { return "S" + std::to_string(i) + "$d"; }

RemovalStructure remove(const Structure& a, Elem d, int r) {
  std::size_t n = a.size();
  if (n < 2) throw InputError("removal needs a structure with at least two elements");
  if (d >= n) throw InputError("removed element out of range");
  if (r < 0) throw InputError("removal radius must be non-negative");
  std::vector<RemovalProjection> projections;
  std::vector<Elem> parent;
  std::vector<std::string> names;
  for (Elem e = 0; e < n; ++e)
    if (e != d) {
      names.push_back(a.name(e));
      parent.push_back(e);
    }
  auto shift = [d](Elem e) { return e > d ? e - 1 : e; };

  Signature sig;
  std::vector<std::vector<Tuple>> tuples;
  for (std::size_t ri = 0; ri < a.signature().size(); ++ri) {
    const auto& sym = a.signature().symbols()[ri];
    int k = sym.arity;
    std::size_t first = tuples.size();
    for (std::uint32_t m = 0; m < (1u << k); ++m) {
      std::vector<int> pos;
      for (int i = 0; i < k; ++i)
        if (m >> i & 1) pos.push_back(i + 1);
      std::string name = removal_symbol(sym.name, pos);
      sig.add(name, k - static_cast<int>(pos.size()));
      projections.push_back({sym.name, pos, name});
      tuples.emplace_back();
    }
    for (const auto& t : a.relation_at(ri).tuples()) {
      std::uint32_t m = 0;
      Tuple rest;
      for (int i = 0; i < k; ++i) {
        if (t[i] == d)
          m |= 1u << i;
        else
          rest.push_back(shift(t[i]));
      }
      tuples[first + m].push_back(std::move(rest));
    }
  }
  // S_i = elements at distance 1..i from d.
  LocalBfs bfs(a);
  const auto& ball = bfs.run(d, static_cast<std::uint32_t>(r));
  for (int i = 1; i <= r; ++i) {
    sig.add(halo_symbol(i), 1);
    std::vector<Tuple> s;
    for (auto [e, dist] : ball)
      if (dist >= 1 && dist <= static_cast<std::uint32_t>(i)) s.push_back({shift(e)});
    tuples.push_back(std::move(s));
  }
  for (auto& ts : tuples) std::sort(ts.begin(), ts.end());
  return RemovalStructure{a.signature(), std::move(projections),
                          Structure::from_sorted(std::move(sig), std::move(names), std::move(tuples)), d, r,
                          std::move(parent)};
}

std::vector<std::pair<std::string, Tuple>> restore_tuples(const RemovalStructure& rs) {
  std::vector<std::pair<std::string, Tuple>> out;
  for (const auto& p : rs.projections) {
    int k = rs.base.arity(p.rel);
    for (const auto& t : rs.structure.relation(p.symbol).tuples()) {
      Tuple full;
      std::size_t j = 0;
      for (int i = 1; i <= k; ++i) {
        if (std::find(p.positions.begin(), p.positions.end(), i) != p.positions.end())
          full.push_back(rs.removed);
        else
          full.push_back(rs.parent[t[j++]]);
      }
      out.push_back({p.rel, std::move(full)});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

Expr rf(const Expr& f, const VarSet& V, int r) {
  switch (f->kind) {
    case Kind::True:
    case Kind::False:
      return f;
    case Kind::Eq: {
      bool a = V.count(f->vars[0]) != 0, b = V.count(f->vars[1]) != 0;
      if (a && b) return mk_true();
      if (a || b) return mk_false();
      return f;
    }
    case Kind::Atom: {
      std::vector<int> pos;
      std::vector<Var> rest;
      for (std::size_t i = 0; i < f->vars.size(); ++i) {
        if (V.count(f->vars[i]))
          pos.push_back(static_cast<int>(i + 1));
        else
          rest.push_back(f->vars[i]);
      }
      return mk_atom(removal_symbol(f->name, pos), rest);
    }
    case Kind::Dist: {
      int i = static_cast<int>(f->bound);
      if (i > r)
        throw InputError("distance bound " + std::to_string(i) + " exceeds the removal radius " + std::to_string(r));
      Var x = f->vars[0], y = f->vars[1];
      bool a = V.count(x) != 0, b = V.count(y) != 0;
      if (a && b) return mk_true();
      if (a || b) {
        if (i == 0) return mk_false();
        return mk_atom(halo_symbol(i), {a ? y : x});
      }
      if (x == y) return mk_true();
      // A shortest path either avoids d or passes through it.
      std::vector<Expr> alts{f};
      for (int i1 = 1; i1 < i; ++i1)
        alts.push_back(mk_and(mk_atom(halo_symbol(i1), {x}), mk_atom(halo_symbol(i - i1), {y})));
      return disj_all(alts);
    }
    case Kind::Not:
      return negate(rf(f->kids[0], V, r));
    case Kind::Or:
      return disj(rf(f->kids[0], V, r), rf(f->kids[1], V, r));
    case Kind::Exists: {
      Var x = f->vars[0];
      VarSet with = V, without = V;
      with.insert(x);
      without.erase(x);
      return disj(rf(f->kids[0], with, r), mk_exists(x, rf(f->kids[0], without, r)));
    }
    default:
      throw InputError("removal is defined for first-order formulas without counting: " + render(f));
  }
}

void check_term(const BasicTerm& t) {
  VarSet allowed(t.ys.begin(), t.ys.end());
  if (allowed.size() != t.ys.size()) throw InputError("repeated counted variable");
  if (t.unary) {
    if (allowed.count(t.x)) throw InputError("the free variable of a unary term is counted");
    allowed.insert(t.x);
  }
  for (Var v : t.body->free)
    if (!allowed.count(v)) throw InputError("variable " + v.name() + " is free in a basic term body");
}

}  // namespace

Expr removal_formula(const Expr& phi, const VarSet& V, int r) { return simplify(rf(phi, V, r)); }

std::vector<BasicTerm> removal_ground_term(const BasicTerm& g, int r) {
  if (g.unary) throw InputError("expected a ground basic term");
  check_term(g);
  std::vector<BasicTerm> out;
  std::size_t k = g.ys.size();
  for (std::uint32_t m = 0; m < (1u << k); ++m) {
    BasicTerm t;
    VarSet V;
    for (std::size_t i = 0; i < k; ++i) {
      if (m >> i & 1)
        V.insert(g.ys[i]);
      else
        t.ys.push_back(g.ys[i]);
    }
    t.body = removal_formula(g.body, V, r);
    out.push_back(std::move(t));
  }
  return out;
}

UnaryRemoval removal_unary_term(const BasicTerm& u, int r) {
  if (!u.unary) throw InputError("expected a unary basic term");
  check_term(u);
  UnaryRemoval out;
  std::size_t k = u.ys.size();
  for (std::uint32_t m = 0; m < (1u << k); ++m) {
    VarSet V;
    std::vector<Var> rest;
    for (std::size_t i = 0; i < k; ++i) {
      if (m >> i & 1)
        V.insert(u.ys[i]);
      else
        rest.push_back(u.ys[i]);
    }
    BasicTerm un;
    un.unary = true;
    un.x = u.x;
    un.ys = rest;
    un.body = removal_formula(u.body, V, r);
    out.unaries.push_back(std::move(un));
    VarSet Vd = V;
    Vd.insert(u.x);
    BasicTerm gr;
    gr.ys = rest;
    gr.body = removal_formula(u.body, Vd, r);
    out.grounds.push_back(std::move(gr));
  }
  return out;
}

}  // namespace focq
