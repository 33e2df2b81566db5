#include "focq/eval.hpp"

#include <algorithm>

namespace focq {

namespace {

constexpr Elem kUnset = 0xffffffffu;
constexpr std::size_t kMemoLimit = std::size_t(1) << 22;

struct MemoKey {
  const Node* node;
  Elem a, b;
  bool operator==(const MemoKey&) const = default;
};

struct MemoHash {
  std::size_t operator()(const MemoKey& k) const noexcept {
    std::size_t h = std::hash<const void*>()(k.node);
    h ^= (static_cast<std::size_t>(k.a) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
    h ^= (static_cast<std::size_t>(k.b) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
    return h;
  }
};

struct BlockPlan {
  std::vector<Var> vars;
  Expr body;
  // levels[j]: conjuncts decidable once the first j block variables are bound
  std::vector<std::vector<Expr>> levels;
};

}  // namespace

struct Evaluator::Impl {
  const Structure& a;
  const PredicateRegistry& preds;
  std::vector<Elem> slots;
  std::unordered_map<const Node*, Expr> pins;
  std::unordered_map<const Node*, const Relation*> rels;
  std::unordered_map<const Node*, BlockPlan> plans;
  std::unordered_map<MemoKey, bool, MemoHash> fmemo;
  std::unordered_map<MemoKey, Int, MemoHash> tmemo;
  std::uint64_t hits = 0;

  Impl(const Structure& s, const PredicateRegistry& p) : a(s), preds(p) {}

  Elem& slot(Var v) {
    if (v.id() >= slots.size()) slots.resize(std::max<std::size_t>(v.id() + 1, Var::table_size()), kUnset);
    return slots[v.id()];
  }

  Elem get(Var v) {
    Elem e = slot(v);
    if (e == kUnset) throw InputError("variable " + v.name() + " is not assigned");
    return e;
  }

  void pin(const Expr& e) {
    if (!pins.count(e.get())) pins.emplace(e.get(), e);
  }

  bool memoizable(const Node& n) const { return n.binder && n.free.size() <= 2; }

  MemoKey key(const Node& n) {
    MemoKey k{&n, kUnset, kUnset};
    if (!n.free.empty()) k.a = get(n.free[0]);
    if (n.free.size() > 1) k.b = get(n.free[1]);
    return k;
  }

  const Relation& relation(const Expr& e) {
    auto it = rels.find(e.get());
    if (it != rels.end()) return *it->second;
    const Relation& r = a.relation(e->name);
    if (r.arity() != static_cast<int>(e->vars.size()))
      throw InputError("relation " + e->name + " used with wrong arity");
    pin(e);
    rels.emplace(e.get(), &r);
    return r;
  }

  const BlockPlan& plan(const Expr& e) {
    auto it = plans.find(e.get());
    if (it != plans.end()) return it->second;
    pin(e);
    BlockPlan p;
    if (e->kind == Kind::Exists) {
      Expr body = e;
      while (body->kind == Kind::Exists &&
             std::find(p.vars.begin(), p.vars.end(), body->vars[0]) == p.vars.end()) {
        p.vars.push_back(body->vars[0]);
        body = body->kids[0];
      }
      p.body = body;
    } else {
      p.vars = e->vars;
      p.body = e->kids[0];
    }
    build_levels(p);
    return plans.emplace(e.get(), std::move(p)).first->second;
  }

  static void build_levels(BlockPlan& p) {
    p.levels.assign(p.vars.size() + 1, {});
    for (const auto& c : conjuncts(p.body)) {
      std::size_t lvl = 0;
      for (std::size_t j = 0; j < p.vars.size(); ++j)
        if (c->has_free(p.vars[j])) lvl = j + 1;
      p.levels[lvl].push_back(c);
    }
  }

  // Visits satisfying tuples; returns true if visit requested a stop.
  template <class Visit>
  bool search(const BlockPlan& p, std::size_t level, Tuple& cur, Visit& visit) {
    for (const auto& c : p.levels[level])
      if (!F(c)) return false;
    if (level == p.vars.size()) return visit(cur);
    Elem& s = slot(p.vars[level]);
    const std::size_t n = a.size();
    for (Elem e = 0; e < n; ++e) {
      s = e;
      cur[level] = e;
      if (search(p, level + 1, cur, visit)) return true;
    }
    return false;
  }

  template <class Visit>
  void run_block(const BlockPlan& p, Visit& visit) {
    std::vector<Elem> saved;
    for (Var v : p.vars) saved.push_back(slot(v));
    Tuple cur(p.vars.size());
    try {
      search(p, 0, cur, visit);
    } catch (...) {
      for (std::size_t i = 0; i < p.vars.size(); ++i) slot(p.vars[i]) = saved[i];
      throw;
    }
    for (std::size_t i = 0; i < p.vars.size(); ++i) slot(p.vars[i]) = saved[i];
  }

  bool F(const Expr& e) {
    const Node& n = *e;
    switch (n.kind) {
      case Kind::True:
        return true;
      case Kind::False:
        return false;
      case Kind::Eq:
        return get(n.vars[0]) == get(n.vars[1]);
      case Kind::Atom: {
        const Relation& r = relation(e);
        if (n.vars.empty()) return r.size() > 0;
        Elem buf[16];
        std::vector<Elem> big;
        Elem* args = buf;
        if (n.vars.size() > 16) {
          big.resize(n.vars.size());
          args = big.data();
        }
        for (std::size_t i = 0; i < n.vars.size(); ++i) args[i] = get(n.vars[i]);
        return r.contains(args);
      }
      case Kind::Dist:
        return a.within(get(n.vars[0]), get(n.vars[1]), n.bound);
      case Kind::Not:
        return !F(n.kids[0]);
      case Kind::Or:
        return F(n.kids[0]) || F(n.kids[1]);
      case Kind::Exists:
      case Kind::Pred: {
        if (!memoizable(n)) return compute_formula(e);
        MemoKey k = key(n);
        auto it = fmemo.find(k);
        if (it != fmemo.end()) {
          ++hits;
          return it->second;
        }
        bool v = compute_formula(e);
        if (fmemo.size() > kMemoLimit) fmemo.clear();
        pin(e);
        fmemo.emplace(k, v);
        return v;
      }
      default:
        throw InputError("term used where a formula is expected");
    }
  }

  bool compute_formula(const Expr& e) {
    const Node& n = *e;
    if (n.kind == Kind::Exists) {
      const BlockPlan& p = plan(e);
      bool found = false;
      auto visit = [&](const Tuple&) { return found = true; };
      run_block(p, visit);
      return found;
    }
    std::vector<Int> args;
    args.reserve(n.kids.size());
    for (const auto& k : n.kids) args.push_back(T(k));
    return preds.call(n.name, args);
  }

  Int T(const Expr& e) {
    const Node& n = *e;
    switch (n.kind) {
      case Kind::Const:
        return n.value;
      case Kind::Add:
        return T(n.kids[0]) + T(n.kids[1]);
      case Kind::Mul:
        return T(n.kids[0]) * T(n.kids[1]);
      case Kind::Count: {
        if (!memoizable(n)) return compute_count(e);
        MemoKey k = key(n);
        auto it = tmemo.find(k);
        if (it != tmemo.end()) {
          ++hits;
          return it->second;
        }
        Int v = compute_count(e);
        if (tmemo.size() > kMemoLimit) tmemo.clear();
        pin(e);
        tmemo.emplace(k, v);
        return v;
      }
      default:
        throw InputError("formula used where a term is expected");
    }
  }

  Int compute_count(const Expr& e) {
    const BlockPlan& p = plan(e);
    std::uint64_t c = 0;
    auto visit = [&](const Tuple&) {
      ++c;
      return false;
    };
    run_block(p, visit);
    return Int(c);
  }

  void check_assigned(const Expr& e) {
    for (Var v : e->free)
      if (v.id() >= slots.size() || slots[v.id()] == kUnset)
        throw InputError("free variable " + v.name() + " is not assigned");
  }
};

Evaluator::Evaluator(const Structure& a, const PredicateRegistry& preds)
    : a_(a), impl_(std::make_unique<Impl>(a, preds)) {}

Evaluator::~Evaluator() = default;

void Evaluator::bind(Var v, Elem e) {
  if (e >= a_.size()) throw InputError("assigned element out of range");
  impl_->slot(v) = e;
}

void Evaluator::unbind(Var v) { impl_->slot(v) = kUnset; }

bool Evaluator::holds_bound(const Expr& f) {
  if (!f->is_formula()) throw InputError("expected a formula");
  impl_->check_assigned(f);
  return impl_->F(f);
}

Int Evaluator::value_bound(const Expr& t) {
  if (!t->is_term()) throw InputError("expected a term");
  impl_->check_assigned(t);
  return impl_->T(t);
}

namespace {

template <class Fn>
auto with_assignment(Evaluator& ev, const Assignment& beta, Fn fn) {
  for (const auto& [v, e] : beta) ev.bind(v, e);
  struct Reset {
    Evaluator& ev;
    const Assignment& beta;
    ~Reset() {
      for (const auto& [v, _] : beta) ev.unbind(v);
    }
  } reset{ev, beta};
  return fn();
}

}  // namespace

bool Evaluator::holds(const Expr& f, const Assignment& beta) {
  return with_assignment(*this, beta, [&] { return holds_bound(f); });
}

Int Evaluator::value(const Expr& t, const Assignment& beta) {
  return with_assignment(*this, beta, [&] { return value_bound(t); });
}

void Evaluator::enumerate(const std::vector<Var>& vars, const Expr& f,
                          const std::function<bool(const Tuple&)>& visit) {
  BlockPlan p;
  p.vars = vars;
  p.body = f;
  for (std::size_t i = 0; i < vars.size(); ++i)
    for (std::size_t j = i + 1; j < vars.size(); ++j)
      if (vars[i] == vars[j]) throw InputError("enumeration variables must be distinct");
  Impl::build_levels(p);
  for (Var v : f->free)
    if (std::find(vars.begin(), vars.end(), v) == vars.end()) {
      Elem e = impl_->slot(v);
      if (e == kUnset) throw InputError("free variable " + v.name() + " is not assigned");
    }
  auto fn = [&](const Tuple& t) { return visit(t); };
  impl_->run_block(p, fn);
}

std::uint64_t Evaluator::memo_hits() const { return impl_->hits; }

bool holds(const Structure& a, const PredicateRegistry& preds, const Expr& f, const Assignment& beta) {
  Evaluator ev(a, preds);
  return ev.holds(f, beta);
}

Int value(const Structure& a, const PredicateRegistry& preds, const Expr& t, const Assignment& beta) {
  Evaluator ev(a, preds);
  return ev.value(t, beta);
}

QueryResult eval_query(const Query& q, const Structure& a, const PredicateRegistry& preds) {
  validate_query(q);
  Evaluator ev(a, preds);
  QueryResult res;
  ev.enumerate(q.out_vars, q.body, [&](const Tuple& t) {
    QueryRow row;
    row.elems = t;
    for (std::size_t i = 0; i < q.out_vars.size(); ++i) ev.bind(q.out_vars[i], t[i]);
    for (const auto& term : q.out_terms) row.values.push_back(ev.value_bound(term));
    res.rows.push_back(std::move(row));
    return false;
  });
  for (Var v : q.out_vars) ev.unbind(v);
  // Tuples are produced in lexicographic index order, which is the
  // lexicographic order of element names.
  return res;
}

// ------------------------------------------------------ free-variable removal

namespace {

Expr marker_conj(const std::vector<Var>& xs, const std::vector<std::string>& syms) {
  std::vector<Expr> cs;
  for (std::size_t i = 0; i < xs.size(); ++i) cs.push_back(mk_atom(syms[i], {xs[i]}));
  return conj_all(cs);
}

Expr wrap_counts(const Expr& t, const std::vector<Var>& xs, const std::vector<std::string>& syms) {
  switch (t->kind) {
    case Kind::Const:
      return t;
    case Kind::Add:
      return mk_add(wrap_counts(t->kids[0], xs, syms), wrap_counts(t->kids[1], xs, syms));
    case Kind::Mul:
      return mk_mul(wrap_counts(t->kids[0], xs, syms), wrap_counts(t->kids[1], xs, syms));
    case Kind::Count: {
      VarSet avoid(xs.begin(), xs.end());
      Expr c = rename_bound(t, avoid);
      Expr body = c->kids[0];
      Expr wrapped = body;
      if (!xs.empty()) {
        Expr inner = conj(marker_conj(xs, syms), body);
        wrapped = inner;
        for (auto it = xs.rbegin(); it != xs.rend(); ++it) wrapped = mk_exists(*it, wrapped);
      }
      return mk_count(c->vars, wrapped);
    }
    default:
      throw InputError("expected a term");
  }
}

}  // namespace

FreeVarElimination eliminate_free_vars(const Expr& phi, const std::vector<Expr>& terms,
                                       const std::vector<Var>& xs) {
  FreeVarElimination out;
  out.vars = xs;
  VarSet xset(xs.begin(), xs.end());
  if (xset.size() != xs.size()) throw InputError("free variables must be distinct");
  if (free_vars(phi) != xset) throw InputError("formula must have exactly the listed free variables");
  for (const auto& t : terms)
    for (Var v : t->free)
      if (!xset.count(v)) throw InputError("term has a free variable outside the listed ones");
  for (std::size_t i = 0; i < xs.size(); ++i) out.symbols.push_back("X$" + std::to_string(i + 1));
  if (xs.empty()) {
    out.sentence = phi;
    out.terms = terms;
    return out;
  }
  Expr body = conj(marker_conj(xs, out.symbols), rename_bound(phi, xset));
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) body = mk_exists(*it, body);
  out.sentence = body;
  for (const auto& t : terms) out.terms.push_back(wrap_counts(t, xs, out.symbols));
  return out;
}

Structure expand_with_tuple(const Structure& a, const FreeVarElimination& fe, const Tuple& tuple) {
  if (tuple.size() != fe.vars.size()) throw InputError("tuple length does not match the eliminated variables");
  std::map<std::string, ExtraRelation> extra;
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    if (a.signature().contains(fe.symbols[i]))
      throw InputError("symbol " + fe.symbols[i] + " already in the signature");
    extra[fe.symbols[i]] = ExtraRelation{1, {Tuple{tuple[i]}}};
  }
  return expand(a, extra);
}

}  // namespace focq
