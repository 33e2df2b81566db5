#include "focq/analysis.hpp"

#include <algorithm>
#include <numeric>

namespace focq {

Fo1cReport validate_fo1c(const Expr& e) {
  Fo1cReport rep;
  std::vector<Expr> stack{e};
  while (!stack.empty()) {
    Expr n = stack.back();
    stack.pop_back();
    if (n->kind == Kind::Pred && n->free.size() > 1) {
      rep.ok = false;
      std::string vars;
      for (Var v : free_vars(n)) vars += (vars.empty() ? "" : ", ") + v.name();
      rep.violations.push_back({n, n->free, "predicate application " + render(n) +
                                                " has free variables {" + vars + "}"});
    }
    for (const auto& k : n->kids) stack.push_back(k);
  }
  return rep;
}

Int f_q(int q, int l) {
  if (q < 1 || l < 0) throw InputError("f_q needs q >= 1 and l >= 0");
  return boost::multiprecision::pow(Int(4 * q), static_cast<unsigned>(q + l));
}

namespace {

bool q_rank_walk(const Expr& e, int q, int l, int depth) {
  switch (e->kind) {
    case Kind::Count:
    case Kind::Pred:
    case Kind::Const:
    case Kind::Add:
    case Kind::Mul:
      throw InputError("q-rank is only defined for formulas without counting");
    case Kind::Dist: {
      if (depth > l) return false;
      return Int(e->bound) <= boost::multiprecision::pow(Int(4 * q), static_cast<unsigned>(q + l - depth));
    }
    case Kind::Exists:
      return depth + 1 <= l && q_rank_walk(e->kids[0], q, l, depth + 1);
    default:
      for (const auto& k : e->kids)
        if (!q_rank_walk(k, q, l, depth)) return false;
      return true;
  }
}

}  // namespace

bool q_rank_check(const Expr& phi, int q, int l) {
  if (q < 1 || l < 0) throw InputError("q-rank check needs q >= 1 and l >= 0");
  return q_rank_walk(phi, q, l, 0);
}

std::pair<std::vector<Var>, Expr> exists_block(const Expr& f) {
  std::vector<Var> vs;
  Expr body = f;
  while (body->kind == Kind::Exists) {
    vs.push_back(body->vars[0]);
    body = body->kids[0];
  }
  return {vs, body};
}

// ---------------------------------------------------------------- miniscope

namespace {

Expr rebuild_kids(const Expr& e, std::vector<Expr> kids) {
  switch (e->kind) {
    case Kind::Not:
      return mk_not(kids[0]);
    case Kind::Or:
      return mk_or(kids[0], kids[1]);
    case Kind::Exists:
      return mk_exists(e->vars[0], kids[0]);
    case Kind::Pred:
      return mk_pred(e->name, std::move(kids));
    case Kind::Count:
      return mk_count(e->vars, kids[0]);
    case Kind::Add:
      return mk_add(kids[0], kids[1]);
    case Kind::Mul:
      return mk_mul(kids[0], kids[1]);
    default:
      return e;
  }
}

Expr miniscope_block(const std::vector<Var>& block, const Expr& body) {
  auto ds = disjuncts(body);
  if (ds.size() > 1) {
    std::vector<Expr> parts;
    for (const auto& d : ds) parts.push_back(miniscope_block(block, d));
    return disj_all(parts);
  }
  if (ds.empty()) return mk_false();
  auto cs = conjuncts(body);
  std::vector<int> parent(cs.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  std::vector<std::vector<Var>> uses(cs.size());
  for (std::size_t i = 0; i < cs.size(); ++i)
    for (Var v : block)
      if (cs[i]->has_free(v)) uses[i].push_back(v);
  for (Var v : block) {
    int first = -1;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      if (std::find(uses[i].begin(), uses[i].end(), v) == uses[i].end()) continue;
      if (first < 0)
        first = static_cast<int>(i);
      else
        parent[find(static_cast<int>(i))] = find(first);
    }
  }
  std::vector<Expr> outside;
  std::map<int, std::vector<Expr>> groups;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (uses[i].empty())
      outside.push_back(cs[i]);
    else
      groups[find(static_cast<int>(i))].push_back(cs[i]);
  }
  std::vector<Expr> parts = outside;
  for (auto& [root, members] : groups) {
    std::vector<Var> vs;
    for (Var v : block)
      for (const auto& m : members)
        if (m->has_free(v)) {
          vs.push_back(v);
          break;
        }
    parts.push_back(exists_all(vs, conj_all(members)));
  }
  return conj_all(parts);
}

}  // namespace

Expr miniscope(const Expr& e) {
  if (e->kids.empty()) return e;
  if (e->kind == Kind::Exists) {
    auto [block, body] = exists_block(e);
    // Inner variables shadow outer ones of the same name; only the
    // innermost binding is visible in the body.
    std::vector<Var> distinct;
    for (auto it = block.rbegin(); it != block.rend(); ++it)
      if (std::find(distinct.begin(), distinct.end(), *it) == distinct.end()) distinct.insert(distinct.begin(), *it);
    return miniscope_block(distinct, miniscope(body));
  }
  std::vector<Expr> kids;
  bool changed = false;
  for (const auto& k : e->kids) {
    kids.push_back(miniscope(k));
    changed = changed || kids.back() != k;
  }
  return changed ? rebuild_kids(e, std::move(kids)) : e;
}

std::vector<Expr> sentence_constituents(const Expr& f) {
  std::vector<Expr> out;
  std::vector<Expr> stack{f};
  while (!stack.empty()) {
    Expr n = stack.back();
    stack.pop_back();
    if (n->free.empty() && (n->kind == Kind::Exists || n->kind == Kind::Pred)) {
      bool seen = false;
      for (const auto& o : out) seen = seen || structurally_equal(o, n);
      if (!seen) out.push_back(n);
      continue;
    }
    if (n->kind == Kind::Pred) continue;
    for (auto it = n->kids.rbegin(); it != n->kids.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

// ----------------------------------------------------------------- locality

namespace {

struct GuardEdge {
  Var a, b;
  std::int64_t w;
};

void collect_guards(const Expr& conjunct, VarSet& taken, std::vector<GuardEdge>& out) {
  switch (conjunct->kind) {
    case Kind::Atom:
      for (std::size_t i = 0; i < conjunct->vars.size(); ++i)
        for (std::size_t j = 0; j < conjunct->vars.size(); ++j)
          if (i != j && conjunct->vars[i] != conjunct->vars[j])
            out.push_back({conjunct->vars[i], conjunct->vars[j], 1});
      return;
    case Kind::Eq:
      out.push_back({conjunct->vars[0], conjunct->vars[1], 0});
      out.push_back({conjunct->vars[1], conjunct->vars[0], 0});
      return;
    case Kind::Dist:
      out.push_back({conjunct->vars[0], conjunct->vars[1], conjunct->bound});
      out.push_back({conjunct->vars[1], conjunct->vars[0], conjunct->bound});
      return;
    case Kind::Exists: {
      auto [inner, body] = exists_block(conjunct);
      for (Var v : inner)
        if (taken.count(v)) return;  // shadowing; skip conservatively
      for (Var v : inner) taken.insert(v);
      for (const auto& c : conjuncts(body)) collect_guards(c, taken, out);
      return;
    }
    default:
      return;
  }
}

}  // namespace

bool place_block(const std::vector<Var>& block, const Expr& body,
                 const std::map<Var, Placement>& scope, std::map<Var, Placement>& out) {
  VarSet taken;
  for (const auto& [v, _] : scope) taken.insert(v);
  for (Var v : block) taken.insert(v);
  std::vector<GuardEdge> edges;
  for (const auto& c : conjuncts(body)) collect_guards(c, taken, edges);

  std::map<Var, Placement> known;
  for (const auto& [v, p] : scope)
    if (std::find(block.begin(), block.end(), v) == block.end()) known[v] = p;
  std::map<Var, Placement> cur;  // block and auxiliary variables
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& e : edges) {
      if (known.count(e.b)) continue;
      const Placement* src = nullptr;
      if (auto it = known.find(e.a); it != known.end())
        src = &it->second;
      else if (auto jt = cur.find(e.a); jt != cur.end())
        src = &jt->second;
      if (!src) continue;
      Placement cand{src->anchor, src->offset + e.w};
      auto it = cur.find(e.b);
      if (it == cur.end() || cand.offset < it->second.offset) {
        cur[e.b] = cand;
        changed = true;
      }
    }
  }
  bool ok = true;
  for (Var v : block) {
    auto it = cur.find(v);
    if (it == cur.end()) {
      ok = false;
      continue;
    }
    out[v] = it->second;
  }
  return ok;
}

namespace {

struct LocalityWalk {
  LocalityOptions opt;
  LocalityReport rep;
  std::map<Var, Placement> env;

  bool fail(const std::string& msg) {
    if (rep.diagnostic.empty()) rep.diagnostic = msg;
    return false;
  }

  bool offset_of(Var v, std::int64_t& off) {
    auto it = env.find(v);
    if (it == env.end()) return fail("variable " + v.name() + " is free but not a centre variable");
    off = it->second.offset;
    return true;
  }

  bool walk(const Expr& f) {
    if (f->free.empty() && (f->kind == Kind::Exists || f->kind == Kind::Pred)) {
      bool seen = false;
      for (const auto& s : rep.sentences) seen = seen || structurally_equal(s, f);
      if (!seen) rep.sentences.push_back(f);
      return true;
    }
    switch (f->kind) {
      case Kind::True:
      case Kind::False:
        return true;
      case Kind::Eq:
      case Kind::Atom: {
        std::int64_t m = 0;
        for (Var v : f->vars) {
          std::int64_t o = 0;
          if (!offset_of(v, o)) return false;
          m = std::max(m, o);
        }
        rep.radius = std::max(rep.radius, m);
        return true;
      }
      case Kind::Dist: {
        std::int64_t a = 0, b = 0;
        if (!offset_of(f->vars[0], a) || !offset_of(f->vars[1], b)) return false;
        std::int64_t c = (a + b + f->bound) / 2 + (opt.max_arity >= 3 ? 1 : 0);
        rep.radius = std::max({rep.radius, a, b, c});
        return true;
      }
      case Kind::Not:
      case Kind::Or:
        for (const auto& k : f->kids)
          if (!walk(k)) return false;
        return true;
      case Kind::Exists: {
        auto [block, body] = exists_block(f);
        std::map<Var, Placement> placed;
        if (!place_block(block, body, env, placed)) {
          for (Var v : block)
            if (!placed.count(v))
              return fail("quantified variable " + v.name() + " in " + render(f) +
                          " is not tied to an enclosing variable by a conjunct");
        }
        std::map<Var, std::optional<Placement>> saved;
        for (const auto& [v, p] : placed) {
          auto it = env.find(v);
          saved[v] = it == env.end() ? std::nullopt : std::optional<Placement>(it->second);
          env[v] = p;
          rep.radius = std::max(rep.radius, p.offset);
        }
        bool ok = walk(body);
        for (const auto& [v, p] : saved) {
          if (p)
            env[v] = *p;
          else
            env.erase(v);
        }
        return ok;
      }
      case Kind::Pred:
        return fail("predicate application " + render(f) + " has free variables inside a local formula");
      default:
        return fail("unexpected term in formula position");
    }
  }
};

}  // namespace

LocalityReport analyze_locality(const Expr& psi, const std::vector<Var>& centre, LocalityOptions opt) {
  LocalityWalk w;
  w.opt = opt;
  for (std::size_t i = 0; i < centre.size(); ++i) w.env[centre[i]] = Placement{static_cast<int>(i), 0};
  w.rep.local = w.walk(psi);
  if (!w.rep.local) w.rep.radius = 0;
  return w.rep;
}

}  // namespace focq
