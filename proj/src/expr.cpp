#include "focq/expr.hpp"

#include <algorithm>
#include <deque>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

namespace focq {

// --------------------------------------------------------------------- Var

namespace {

struct VarTable {
  std::shared_mutex mu;
  std::deque<std::string> names;
  std::unordered_map<std::string_view, std::uint32_t> index;
};

VarTable& var_table() {
  static VarTable t;
  return t;
}

}  // namespace

Var::Var(std::string_view name) {
  if (name.empty()) throw InputError("empty variable name");
  auto& t = var_table();
  {
    std::shared_lock lock(t.mu);
    auto it = t.index.find(name);
    if (it != t.index.end()) {
      id_ = it->second;
      return;
    }
  }
  std::unique_lock lock(t.mu);
  auto it = t.index.find(name);
  if (it != t.index.end()) {
    id_ = it->second;
    return;
  }
  id_ = static_cast<std::uint32_t>(t.names.size());
  t.names.emplace_back(name);
  t.index.emplace(t.names.back(), id_);
}

const std::string& Var::name() const {
  static const std::string invalid = "<invalid>";
  if (!valid()) return invalid;
  auto& t = var_table();
  std::shared_lock lock(t.mu);
  return t.names[id_];
}

std::uint32_t Var::table_size() {
  auto& t = var_table();
  std::shared_lock lock(t.mu);
  return static_cast<std::uint32_t>(t.names.size());
}

bool Node::has_free(Var v) const {
  return std::binary_search(free.begin(), free.end(), v,
                            [](Var a, Var b) { return a.id() < b.id(); });
}

// ------------------------------------------------------------ construction

namespace {

void add_free(std::vector<Var>& out, const std::vector<Var>& in) {
  out.insert(out.end(), in.begin(), in.end());
}

void sort_unique(std::vector<Var>& v) {
  std::sort(v.begin(), v.end(), [](Var a, Var b) { return a.id() < b.id(); });
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

void remove_vars(std::vector<Var>& v, const std::vector<Var>& drop) {
  v.erase(std::remove_if(v.begin(), v.end(),
                         [&](Var x) { return std::find(drop.begin(), drop.end(), x) != drop.end(); }),
          v.end());
}

Expr finish(Node&& n) {
  switch (n.kind) {
    case Kind::True:
    case Kind::False:
    case Kind::Const:
      break;
    case Kind::Eq:
    case Kind::Atom:
    case Kind::Dist:
      n.free = n.vars;
      break;
    case Kind::Not:
    case Kind::Or:
    case Kind::Pred:
    case Kind::Add:
    case Kind::Mul:
      for (const auto& k : n.kids) {
        add_free(n.free, k->free);
        n.depth = std::max(n.depth, k->depth);
        n.binder = n.binder || k->binder;
      }
      break;
    case Kind::Exists:
      n.free = n.kids[0]->free;
      remove_vars(n.free, n.vars);
      n.depth = n.kids[0]->depth;
      n.binder = true;
      break;
    case Kind::Count:
      n.free = n.kids[0]->free;
      remove_vars(n.free, n.vars);
      n.depth = n.kids[0]->depth + 1;
      n.binder = true;
      break;
  }
  sort_unique(n.free);
  return std::make_shared<const Node>(std::move(n));
}

void require_formula(const Expr& e, const char* where) {
  if (!e || !e->is_formula()) throw InputError(std::string("expected a formula in ") + where);
}

void require_term(const Expr& e, const char* where) {
  if (!e || !e->is_term()) throw InputError(std::string("expected a term in ") + where);
}

}  // namespace

Expr mk_true() {
  static const Expr t = [] { Node n; n.kind = Kind::True; return finish(std::move(n)); }();
  return t;
}

Expr mk_false() {
  static const Expr f = [] { Node n; n.kind = Kind::False; return finish(std::move(n)); }();
  return f;
}

Expr mk_eq(Var a, Var b) {
  Node n;
  n.kind = Kind::Eq;
  n.vars = {a, b};
  return finish(std::move(n));
}

Expr mk_atom(std::string rel, std::vector<Var> args) {
  Node n;
  n.kind = Kind::Atom;
  n.name = std::move(rel);
  n.vars = std::move(args);
  return finish(std::move(n));
}

Expr mk_dist(Var a, Var b, std::uint32_t bound) {
  Node n;
  n.kind = Kind::Dist;
  n.vars = {a, b};
  n.bound = bound;
  return finish(std::move(n));
}

Expr mk_not(Expr f) {
  require_formula(f, "negation");
  Node n;
  n.kind = Kind::Not;
  n.kids = {std::move(f)};
  return finish(std::move(n));
}

Expr mk_or(Expr a, Expr b) {
  require_formula(a, "disjunction");
  require_formula(b, "disjunction");
  Node n;
  n.kind = Kind::Or;
  n.kids = {std::move(a), std::move(b)};
  return finish(std::move(n));
}

Expr mk_exists(Var v, Expr f) {
  require_formula(f, "quantifier");
  Node n;
  n.kind = Kind::Exists;
  n.vars = {v};
  n.kids = {std::move(f)};
  return finish(std::move(n));
}

Expr mk_pred(std::string pred, std::vector<Expr> terms) {
  for (const auto& t : terms) require_term(t, "predicate application");
  Node n;
  n.kind = Kind::Pred;
  n.name = std::move(pred);
  n.kids = std::move(terms);
  return finish(std::move(n));
}

Expr mk_count(std::vector<Var> vars, Expr f) {
  require_formula(f, "counting term");
  for (std::size_t i = 0; i < vars.size(); ++i)
    for (std::size_t j = i + 1; j < vars.size(); ++j)
      if (vars[i] == vars[j])
        throw InputError("counting term binds variable " + vars[i].name() + " twice");
  Node n;
  n.kind = Kind::Count;
  n.vars = std::move(vars);
  n.kids = {std::move(f)};
  return finish(std::move(n));
}

Expr mk_const(Int v) {
  Node n;
  n.kind = Kind::Const;
  n.value = std::move(v);
  return finish(std::move(n));
}

Expr mk_add(Expr a, Expr b) {
  require_term(a, "sum");
  require_term(b, "sum");
  Node n;
  n.kind = Kind::Add;
  n.kids = {std::move(a), std::move(b)};
  return finish(std::move(n));
}

Expr mk_mul(Expr a, Expr b) {
  require_term(a, "product");
  require_term(b, "product");
  Node n;
  n.kind = Kind::Mul;
  n.kids = {std::move(a), std::move(b)};
  return finish(std::move(n));
}

Expr mk_and(Expr a, Expr b) { return mk_not(mk_or(mk_not(std::move(a)), mk_not(std::move(b)))); }
Expr mk_forall(Var v, Expr f) { return mk_not(mk_exists(v, mk_not(std::move(f)))); }
Expr mk_implies(Expr a, Expr b) { return mk_or(mk_not(std::move(a)), std::move(b)); }
Expr mk_geq1(Expr t) { return mk_pred("geq1", {std::move(t)}); }

bool is_true(const Expr& f) { return f->kind == Kind::True; }
bool is_false(const Expr& f) { return f->kind == Kind::False; }

bool is_and(const Expr& f) {
  return f->kind == Kind::Not && f->kids[0]->kind == Kind::Or &&
         f->kids[0]->kids[0]->kind == Kind::Not && f->kids[0]->kids[1]->kind == Kind::Not;
}

Expr negate(Expr f) {
  if (is_true(f)) return mk_false();
  if (is_false(f)) return mk_true();
  if (f->kind == Kind::Not) return f->kids[0];
  return mk_not(std::move(f));
}

Expr disj(Expr a, Expr b) {
  if (is_true(a) || is_true(b)) return mk_true();
  if (is_false(a)) return b;
  if (is_false(b)) return a;
  if (structurally_equal(a, b)) return a;
  return mk_or(std::move(a), std::move(b));
}

Expr conj(Expr a, Expr b) {
  if (is_false(a) || is_false(b)) return mk_false();
  if (is_true(a)) return b;
  if (is_true(b)) return a;
  if (structurally_equal(a, b)) return a;
  return mk_not(mk_or(negate(std::move(a)), negate(std::move(b))));
}

Expr conj_all(const std::vector<Expr>& fs) {
  Expr acc = mk_true();
  for (const auto& f : fs) acc = conj(acc, f);
  return acc;
}

Expr disj_all(const std::vector<Expr>& fs) {
  Expr acc = mk_false();
  for (const auto& f : fs) acc = disj(acc, f);
  return acc;
}

Expr exists_all(const std::vector<Var>& vs, Expr f) {
  for (auto it = vs.rbegin(); it != vs.rend(); ++it) {
    if (is_true(f) || is_false(f)) return f;
    f = mk_exists(*it, std::move(f));
  }
  return f;
}

Expr add_terms(Expr a, Expr b) {
  if (a->kind == Kind::Const && b->kind == Kind::Const) return mk_const(a->value + b->value);
  if (a->kind == Kind::Const && a->value == 0) return b;
  if (b->kind == Kind::Const && b->value == 0) return a;
  return mk_add(std::move(a), std::move(b));
}

Expr mul_terms(Expr a, Expr b) {
  if (a->kind == Kind::Const && b->kind == Kind::Const) return mk_const(a->value * b->value);
  if ((a->kind == Kind::Const && a->value == 0) || (b->kind == Kind::Const && b->value == 0))
    return mk_const(0);
  if (a->kind == Kind::Const && a->value == 1) return b;
  if (b->kind == Kind::Const && b->value == 1) return a;
  return mk_mul(std::move(a), std::move(b));
}

std::vector<Expr> conjuncts(const Expr& f) {
  std::vector<Expr> out;
  std::vector<Expr> stack{f};
  while (!stack.empty()) {
    Expr g = stack.back();
    stack.pop_back();
    if (g->kind == Kind::Not && g->kids[0]->kind == Kind::Or) {
      const auto& o = g->kids[0];
      stack.push_back(negate(o->kids[1]));
      stack.push_back(negate(o->kids[0]));
    } else if (!is_true(g)) {
      out.push_back(g);
    }
  }
  return out;
}

std::vector<Expr> disjuncts(const Expr& f) {
  std::vector<Expr> out;
  std::vector<Expr> stack{f};
  while (!stack.empty()) {
    Expr g = stack.back();
    stack.pop_back();
    if (g->kind == Kind::Or) {
      stack.push_back(g->kids[1]);
      stack.push_back(g->kids[0]);
    } else if (!is_false(g)) {
      out.push_back(g);
    }
  }
  return out;
}

// ----------------------------------------------------------------- analyses

VarSet free_vars(const Expr& e) { return VarSet(e->free.begin(), e->free.end()); }

int count_depth(const Expr& e) { return e->depth; }

std::size_t size(const Expr& e) {
  const Node& n = *e;
  auto list_tokens = [](std::size_t k) { return k == 0 ? std::size_t(0) : 2 * k - 1; };
  switch (n.kind) {
    case Kind::True:
    case Kind::False:
    case Kind::Const:
      return 1;
    case Kind::Eq:
      return 3;
    case Kind::Atom:
      return 3 + list_tokens(n.vars.size());
    case Kind::Dist:
      return 8;
    case Kind::Not:
      return 1 + size(n.kids[0]);
    case Kind::Or:
    case Kind::Add:
    case Kind::Mul:
      return 3 + size(n.kids[0]) + size(n.kids[1]);
    case Kind::Exists:
      return 3 + size(n.kids[0]);
    case Kind::Pred: {
      std::size_t total = 3 + (n.kids.empty() ? 0 : n.kids.size() - 1);
      for (const auto& k : n.kids) total += size(k);
      return total;
    }
    case Kind::Count:
      return 5 + list_tokens(n.vars.size()) + size(n.kids[0]);
  }
  return 0;
}

int quantifier_rank(const Expr& e) {
  int best = 0;
  for (const auto& k : e->kids) best = std::max(best, quantifier_rank(k));
  if (e->kind == Kind::Exists) return best + 1;
  if (e->kind == Kind::Count) return best + static_cast<int>(e->vars.size());
  return best;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (a->kind != b->kind || a->name != b->name || a->vars != b->vars || a->bound != b->bound ||
      a->kids.size() != b->kids.size() || a->free != b->free || a->depth != b->depth)
    return false;
  if (a->kind == Kind::Const && a->value != b->value) return false;
  for (std::size_t i = 0; i < a->kids.size(); ++i)
    if (!structurally_equal(a->kids[i], b->kids[i])) return false;
  return true;
}

void collect_relations(const Expr& e, std::map<std::string, int>& out) {
  if (e->kind == Kind::Atom) out.emplace(e->name, static_cast<int>(e->vars.size()));
  for (const auto& k : e->kids) collect_relations(k, out);
}

// ---------------------------------------------------------------- rendering

namespace {

void join_vars(std::string& out, const std::vector<Var>& vs) {
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) out += ",";
    out += vs[i].name();
  }
}

void render_into(const Node& n, std::string& out, const RenderOptions& opt) {
  switch (n.kind) {
    case Kind::True:
      out += "true";
      return;
    case Kind::False:
      out += "false";
      return;
    case Kind::Eq:
      out += n.vars[0].name() + "=" + n.vars[1].name();
      return;
    case Kind::Atom:
      out += n.name + "(";
      join_vars(out, n.vars);
      out += ")";
      return;
    case Kind::Dist:
      out += "dist(" + n.vars[0].name() + "," + n.vars[1].name() + ")<=" + std::to_string(n.bound);
      return;
    case Kind::Not: {
      const Node& k = *n.kids[0];
      if (opt.sugar && k.kind == Kind::Or && k.kids[0]->kind == Kind::Not &&
          k.kids[1]->kind == Kind::Not) {
        out += "(";
        render_into(*k.kids[0]->kids[0], out, opt);
        out += " & ";
        render_into(*k.kids[1]->kids[0], out, opt);
        out += ")";
        return;
      }
      if (opt.sugar && k.kind == Kind::Exists && k.kids[0]->kind == Kind::Not) {
        out += "forall " + k.vars[0].name() + ". ";
        render_into(*k.kids[0]->kids[0], out, opt);
        return;
      }
      out += "!";
      render_into(k, out, opt);
      return;
    }
    case Kind::Or:
      out += "(";
      render_into(*n.kids[0], out, opt);
      out += " | ";
      render_into(*n.kids[1], out, opt);
      out += ")";
      return;
    case Kind::Exists:
      out += "exists " + n.vars[0].name() + ". ";
      render_into(*n.kids[0], out, opt);
      return;
    case Kind::Pred:
      out += n.name + "(";
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        if (i) out += ",";
        render_into(*n.kids[i], out, opt);
      }
      out += ")";
      return;
    case Kind::Count:
      out += "#(";
      join_vars(out, n.vars);
      out += ").";
      render_into(*n.kids[0], out, opt);
      return;
    case Kind::Const:
      out += n.value.str();
      return;
    case Kind::Add:
    case Kind::Mul:
      out += "(";
      render_into(*n.kids[0], out, opt);
      out += n.kind == Kind::Add ? " + " : " * ";
      render_into(*n.kids[1], out, opt);
      out += ")";
      return;
  }
}

}  // namespace

std::string render(const Expr& e, RenderOptions opt) {
  std::string out;
  render_into(*e, out, opt);
  return out;
}

// ------------------------------------------------------------ simplification

Expr simplify(const Expr& e) {
  const Node& n = *e;
  switch (n.kind) {
    case Kind::True:
    case Kind::False:
    case Kind::Eq:
    case Kind::Atom:
    case Kind::Dist:
    case Kind::Const:
      return e;
    case Kind::Not:
      return negate(simplify(n.kids[0]));
    case Kind::Or:
      return disj(simplify(n.kids[0]), simplify(n.kids[1]));
    case Kind::Exists: {
      Expr body = simplify(n.kids[0]);
      if (is_true(body) || is_false(body)) return body;
      if (!body->has_free(n.vars[0])) return body;
      return mk_exists(n.vars[0], body);
    }
    case Kind::Pred: {
      std::vector<Expr> ts;
      for (const auto& k : n.kids) ts.push_back(simplify(k));
      return mk_pred(n.name, std::move(ts));
    }
    case Kind::Count: {
      Expr body = simplify(n.kids[0]);
      if (is_false(body)) return mk_const(0);
      if (n.vars.empty() && is_true(body)) return mk_const(1);
      return mk_count(n.vars, body);
    }
    case Kind::Add:
      return add_terms(simplify(n.kids[0]), simplify(n.kids[1]));
    case Kind::Mul:
      return mul_terms(simplify(n.kids[0]), simplify(n.kids[1]));
  }
  return e;
}

// ----------------------------------------------------------------- renaming

namespace {

using Env = std::map<Var, Var>;

Var lookup(const Env& env, Var v) {
  auto it = env.find(v);
  return it == env.end() ? v : it->second;
}

Expr rebuild(const Node& n, std::vector<Var> vars, std::vector<Expr> kids) {
  Node m;
  m.kind = n.kind;
  m.name = n.name;
  m.vars = std::move(vars);
  m.kids = std::move(kids);
  m.value = n.value;
  m.bound = n.bound;
  return finish(std::move(m));
}

// Applies env to free occurrences; binders listed in `rename` get the new
// name produced by the callback, all other binders shadow env entries.
template <class BinderFn>
Expr rename_walk(const Expr& e, const Env& env, BinderFn& on_binder) {
  const Node& n = *e;
  switch (n.kind) {
    case Kind::True:
    case Kind::False:
    case Kind::Const:
      return e;
    case Kind::Eq:
    case Kind::Atom:
    case Kind::Dist: {
      std::vector<Var> vs;
      bool changed = false;
      for (Var v : n.vars) {
        Var w = lookup(env, v);
        changed = changed || w != v;
        vs.push_back(w);
      }
      return changed ? rebuild(n, std::move(vs), {}) : e;
    }
    case Kind::Exists:
    case Kind::Count: {
      Env inner = env;
      std::vector<Var> vs;
      for (Var v : n.vars) {
        Var w = on_binder(v);
        if (w == v)
          inner.erase(v);
        else
          inner[v] = w;
        vs.push_back(w);
      }
      Expr body = rename_walk(n.kids[0], inner, on_binder);
      return rebuild(n, std::move(vs), {body});
    }
    default: {
      std::vector<Expr> kids;
      for (const auto& k : n.kids) kids.push_back(rename_walk(k, env, on_binder));
      return rebuild(n, n.vars, std::move(kids));
    }
  }
}

void all_vars(const Expr& e, VarSet& out) {
  for (Var v : e->vars) out.insert(v);
  for (const auto& k : e->kids) all_vars(k, out);
}

}  // namespace

Expr substitute(const Expr& e, const std::map<Var, Var>& sub) {
  if (sub.empty()) return e;
  auto keep = [](Var v) { return v; };
  return rename_walk(e, sub, keep);
}

Var fresh_var(const std::string& prefix, const VarSet& avoid) {
  for (std::size_t i = 1;; ++i) {
    Var v(prefix + std::to_string(i));
    if (!avoid.count(v)) return v;
  }
}

Expr rename_bound(const Expr& e, const VarSet& avoid) {
  VarSet used = avoid;
  all_vars(e, used);
  auto fn = [&](Var v) {
    if (!avoid.count(v)) return v;
    Var w = fresh_var(v.name() + "_", used);
    used.insert(w);
    return w;
  };
  return rename_walk(e, {}, fn);
}

Expr normalize_bound(const Expr& e) {
  VarSet used = free_vars(e);
  std::size_t counter = 0;
  auto fn = [&](Var) {
    for (;;) {
      Var w("w_" + std::to_string(++counter));
      if (!used.count(w)) return w;
    }
  };
  return rename_walk(e, {}, fn);
}

Expr replace_subformulas(const Expr& e, const std::vector<Expr>& from, const std::vector<Expr>& to) {
  for (std::size_t i = 0; i < from.size(); ++i)
    if (structurally_equal(e, from[i])) return to[i];
  if (e->kids.empty()) return e;
  std::vector<Expr> kids;
  bool changed = false;
  for (const auto& k : e->kids) {
    kids.push_back(replace_subformulas(k, from, to));
    changed = changed || kids.back() != k;
  }
  return changed ? rebuild(*e, e->vars, std::move(kids)) : e;
}

// -------------------------------------------------------------------- Query

void validate_query(const Query& q) {
  if (!q.body || !q.body->is_formula()) throw InputError("query body must be a formula");
  VarSet outs;
  for (Var v : q.out_vars)
    if (!outs.insert(v).second) throw InputError("query output variable " + v.name() + " repeated");
  if (free_vars(q.body) != outs)
    throw InputError("query body must have exactly the output variables free");
  for (const auto& t : q.out_terms) {
    if (!t->is_term()) throw InputError("query head entry is not a term");
    for (Var v : t->free)
      if (!outs.count(v))
        throw InputError("query term uses variable " + v.name() + " that is not an output variable");
  }
}

std::string render(const Query& q, RenderOptions opt) {
  std::string out = "(";
  bool first = true;
  for (Var v : q.out_vars) {
    if (!first) out += ", ";
    first = false;
    out += v.name();
  }
  for (const auto& t : q.out_terms) {
    if (!first) out += ", ";
    first = false;
    out += render(t, opt);
  }
  return out + "). " + render(q.body, opt);
}

}  // namespace focq
