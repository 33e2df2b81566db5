#include "focq/cl.hpp"

#include <algorithm>
#include <mutex>
#include <unordered_map>

namespace focq {

std::vector<Var> canonical_vars(int k) {
  static std::vector<Var> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  while (static_cast<int>(cache.size()) < k) cache.push_back(Var("y" + std::to_string(cache.size() + 1)));
  return std::vector<Var>(cache.begin(), cache.begin() + k);
}

Expr delta_formula(const PatternGraph& g, std::uint32_t r, const std::vector<Var>& ys) {
  if (static_cast<int>(ys.size()) != g.k()) throw InputError("delta formula needs one variable per vertex");
  std::vector<Expr> parts;
  for (int i = 0; i < g.k(); ++i)
    for (int j = i + 1; j < g.k(); ++j) {
      Expr d = mk_dist(ys[i], ys[j], r);
      parts.push_back(g.has_edge(i, j) ? d : mk_not(d));
    }
  return conj_all(parts);
}

Expr delta_formula(const PatternGraph& g, std::uint32_t r) {
  return delta_formula(g, r, canonical_vars(g.k()));
}

Expr BasicClTerm::to_expr(Var z) const {
  auto ys = canonical_vars(k);
  Expr body = conj(psi, delta_formula(g, static_cast<std::uint32_t>(pattern_radius()), ys));
  if (!unary) return mk_count(ys, body);
  body = substitute(body, {{ys[0], z}});
  return mk_count(std::vector<Var>(ys.begin() + 1, ys.end()), body);
}

Expr BasicClTerm::to_expr() const { return to_expr(Var("z")); }

BasicClTermPtr make_basic(bool unary, int k, std::int64_t r, PatternGraph g, Expr psi, LocalityOptions opt) {
  if (k < 0 || k > PatternGraph::kMaxVertices) throw UnsupportedError("cl-term width out of range");
  if (unary && k == 0) throw InputError("a unary cl-term needs at least one variable");
  if (g.k() != k) throw InputError("pattern graph size does not match the width");
  if (k > 0 && !g.connected()) throw InputError("basic cl-terms need a connected pattern graph");
  if (r < 0) throw InputError("negative locality radius");
  auto ys = canonical_vars(k);
  VarSet allowed(ys.begin(), ys.end());
  for (Var v : psi->free)
    if (!allowed.count(v)) throw InputError("variable " + v.name() + " is free in a cl-term body");
  auto rep = analyze_locality(psi, ys, opt);
  if (!rep.local) throw UnsupportedError("cl-term body is not local: " + rep.diagnostic);
  if (!rep.sentences.empty()) throw UnsupportedError("cl-term body contains a sentence: " + render(rep.sentences[0]));
  if (rep.radius > r) throw InputError("cl-term body needs radius " + std::to_string(rep.radius));
  auto t = std::make_shared<BasicClTerm>();
  t->unary = unary;
  t->k = k;
  t->r = r;
  t->g = g;
  t->psi = psi;
  t->key = std::string(unary ? "u" : "g") + std::to_string(k) + ":" + std::to_string(r) + ":" +
           std::to_string(g.mask()) + ":" + render(psi, {.sugar = false});
  return t;
}

// ------------------------------------------------------------ polynomial

ClPolynomial ClPolynomial::constant(Int v) {
  ClPolynomial p;
  if (v != 0) p.monos_.push_back({v, {}});
  return p;
}

ClPolynomial ClPolynomial::basic(BasicClTermPtr t) {
  ClPolynomial p;
  p.basics_.push_back(std::move(t));
  p.monos_.push_back({Int(1), {0}});
  return p;
}

std::size_t ClPolynomial::intern(const BasicClTermPtr& t) {
  for (std::size_t i = 0; i < basics_.size(); ++i)
    if (basics_[i]->key == t->key) return i;
  basics_.push_back(t);
  return basics_.size() - 1;
}

void ClPolynomial::normalize() {
  std::map<std::vector<std::size_t>, Int> acc;
  for (auto& m : monos_) {
    std::sort(m.factors.begin(), m.factors.end());
    acc[m.factors] += m.coef;
  }
  // Drop zero monomials and unused basics, keeping first-use order.
  std::vector<long> remap(basics_.size(), -1);
  std::vector<BasicClTermPtr> used;
  std::vector<Monomial> out;
  for (auto& [fs, c] : acc) {
    if (c == 0) continue;
    Monomial m{c, {}};
    for (auto f : fs) {
      if (remap[f] < 0) {
        remap[f] = static_cast<long>(used.size());
        used.push_back(basics_[f]);
      }
      m.factors.push_back(static_cast<std::size_t>(remap[f]));
    }
    std::sort(m.factors.begin(), m.factors.end());
    out.push_back(std::move(m));
  }
  basics_ = std::move(used);
  monos_ = std::move(out);
}

std::optional<Int> ClPolynomial::constant_value() const {
  if (monos_.empty()) return Int(0);
  if (monos_.size() == 1 && monos_[0].factors.empty()) return monos_[0].coef;
  return std::nullopt;
}

bool ClPolynomial::unary() const {
  return std::any_of(basics_.begin(), basics_.end(), [](const auto& b) { return b->unary; });
}

std::int64_t ClPolynomial::radius() const {
  std::int64_t r = 0;
  for (const auto& b : basics_) r = std::max(r, b->r);
  return r;
}

int ClPolynomial::width() const {
  int w = 0;
  for (const auto& b : basics_) w = std::max(w, b->k);
  return w;
}

ClPolynomial ClPolynomial::operator+(const ClPolynomial& o) const {
  ClPolynomial p = *this;
  for (const auto& m : o.monos_) {
    Monomial n{m.coef, {}};
    for (auto f : m.factors) n.factors.push_back(p.intern(o.basics_[f]));
    p.monos_.push_back(std::move(n));
  }
  p.normalize();
  return p;
}

ClPolynomial ClPolynomial::operator-(const ClPolynomial& o) const { return *this + o.scaled(Int(-1)); }

ClPolynomial ClPolynomial::scaled(const Int& c) const {
  ClPolynomial p = *this;
  for (auto& m : p.monos_) m.coef *= c;
  p.normalize();
  return p;
}

ClPolynomial ClPolynomial::operator*(const ClPolynomial& o) const {
  ClPolynomial p;
  p.basics_ = basics_;
  std::vector<std::size_t> remap;
  for (const auto& b : o.basics_) remap.push_back(p.intern(b));
  for (const auto& a : monos_)
    for (const auto& b : o.monos_) {
      Monomial m{a.coef * b.coef, a.factors};
      for (auto f : b.factors) m.factors.push_back(remap[f]);
      p.monos_.push_back(std::move(m));
    }
  p.normalize();
  return p;
}

Int ClPolynomial::evaluate(const std::vector<Int>& values) const {
  if (values.size() != basics_.size()) throw InputError("wrong number of cl-term values");
  Int total = 0;
  for (const auto& m : monos_) {
    Int t = m.coef;
    for (auto f : m.factors) t *= values[f];
    total += t;
  }
  return total;
}

Expr ClPolynomial::to_expr(Var z) const {
  Expr sum;
  for (const auto& m : monos_) {
    Expr prod;
    if (m.coef != 1 || m.factors.empty()) prod = mk_const(m.coef);
    for (auto f : m.factors) {
      Expr b = basics_[f]->to_expr(z);
      prod = prod ? mk_mul(prod, b) : b;
    }
    sum = sum ? mk_add(sum, prod) : prod;
  }
  return sum ? sum : mk_const(Int(0));
}

std::string ClPolynomial::render(Var z) const { return focq::render(to_expr(z)); }

// ------------------------------------------------------------- local BFS

LocalBfs::LocalBfs(const Structure& a) : a_(a), mark_(a.size(), 0) {}

const std::vector<std::pair<Elem, std::uint32_t>>& LocalBfs::run(Elem src, std::uint32_t radius) {
  return run(std::span<const Elem>(&src, 1), radius);
}

const std::vector<std::pair<Elem, std::uint32_t>>& LocalBfs::run(std::span<const Elem> srcs,
                                                                 std::uint32_t radius) {
  if (++stamp_ == 0) {
    std::fill(mark_.begin(), mark_.end(), 0);
    stamp_ = 1;
  }
  out_.clear();
  for (Elem s : srcs)
    if (mark_[s] != stamp_) {
      mark_[s] = stamp_;
      out_.push_back({s, 0});
    }
  for (std::size_t i = 0; i < out_.size(); ++i) {
    auto [v, d] = out_[i];
    if (d == radius) continue;
    for (Elem w : a_.neighbours(v))
      if (mark_[w] != stamp_) {
        mark_[w] = stamp_;
        out_.push_back({w, d + 1});
      }
  }
  return out_;
}

// ------------------------------------------------------- basic evaluation

namespace {

class BasicCounter {
 public:
  BasicCounter(const Structure& s, Evaluator& ev, const BasicClTerm& t)
      : s_(s), ev_(ev), t_(t), bfs_(s), ys_(canonical_vars(t.k)), radius_(static_cast<std::uint32_t>(t.pattern_radius())) {
    int k = t.k;
    parent_.assign(k, -1);
    std::vector<bool> seen(k, false);
    if (k > 0) {
      order_.push_back(0);
      seen[0] = true;
    }
    for (std::size_t i = 0; i < order_.size(); ++i)
      for (int v = 0; v < k; ++v)
        if (!seen[v] && t.g.has_edge(order_[i], v)) {
          seen[v] = true;
          parent_[v] = order_[i];
          order_.push_back(v);
        }
    balls_.resize(k);
  }

  Int count(Elem anchor) {
    total_ = 0;
    if (t_.k == 0) return ev_.holds_bound(t_.psi) ? Int(1) : Int(0);
    assign(0, anchor);
    for (Var y : ys_) ev_.unbind(y);
    return total_;
  }

 private:
  void assign(std::size_t pos, Elem e) {
    int v = order_[pos];
    ev_.bind(ys_[v], e);
    if (pos + 1 == order_.size()) {
      if (ev_.holds_bound(t_.psi)) ++total_;
      return;
    }
    auto& ball = balls_[v];
    ball.clear();
    for (auto [w, d] : bfs_.run(e, radius_)) ball.push_back(w);
    std::sort(ball.begin(), ball.end());
    int next = order_[pos + 1];
    for (Elem c : balls_[parent_[next]]) {
      bool ok = true;
      for (std::size_t q = 0; q <= pos && ok; ++q) {
        int u = order_[q];
        bool near = std::binary_search(balls_[u].begin(), balls_[u].end(), c);
        ok = near == t_.g.has_edge(u, next);
      }
      if (ok) assign(pos + 1, c);
    }
  }

  const Structure& s_;
  Evaluator& ev_;
  const BasicClTerm& t_;
  LocalBfs bfs_;
  std::vector<Var> ys_;
  std::uint32_t radius_;
  std::vector<int> order_, parent_;
  std::vector<std::vector<Elem>> balls_;
  Int total_;
};

Int count_in_neighbourhood(const Structure& a, const PredicateRegistry& preds, const BasicClTerm& t, Elem anchor) {
  Elem centre[] = {anchor};
  auto sub = induced_sub(a, a.ball(centre, t.reach()));
  auto it = std::lower_bound(sub.parent.begin(), sub.parent.end(), anchor);
  Evaluator ev(sub.structure, preds);
  BasicCounter c(sub.structure, ev, t);
  return c.count(static_cast<Elem>(it - sub.parent.begin()));
}

}  // namespace

Int eval_basic_cl(const Structure& a, const PredicateRegistry& preds, const BasicClTerm& t, Elem anchor,
                  BasicEvalOptions opt) {
  if (anchor >= a.size()) throw InputError("anchor out of range");
  if (t.k == 0) return holds(a, preds, t.psi) ? Int(1) : Int(0);
  if (opt.inside_neighbourhood) return count_in_neighbourhood(a, preds, t, anchor);
  Evaluator ev(a, preds);
  BasicCounter c(a, ev, t);
  return c.count(anchor);
}

std::vector<Int> eval_basic_cl_all(const Structure& a, const PredicateRegistry& preds, const BasicClTerm& t,
                                   BasicEvalOptions opt) {
  if (t.k == 0) throw InputError("a width-0 term has no anchor");
  std::vector<Int> out(a.size());
  if (opt.inside_neighbourhood) {
    for (Elem e = 0; e < a.size(); ++e) out[e] = count_in_neighbourhood(a, preds, t, e);
    return out;
  }
  Evaluator ev(a, preds);
  BasicCounter c(a, ev, t);
  for (Elem e = 0; e < a.size(); ++e) out[e] = c.count(e);
  return out;
}

std::vector<Int> eval_basic_cl_at(const Structure& a, const PredicateRegistry& preds, const BasicClTerm& t,
                                  const std::vector<Elem>& anchors, BasicEvalOptions opt) {
  if (t.k == 0) throw InputError("a width-0 term has no anchor");
  for (Elem e : anchors)
    if (e >= a.size()) throw InputError("anchor out of range");
  std::vector<Int> out(anchors.size());
  if (anchors.empty()) return out;
  if (opt.inside_neighbourhood) {
    for (std::size_t i = 0; i < anchors.size(); ++i) out[i] = count_in_neighbourhood(a, preds, t, anchors[i]);
    return out;
  }
  Evaluator ev(a, preds);
  BasicCounter c(a, ev, t);
  for (std::size_t i = 0; i < anchors.size(); ++i) out[i] = c.count(anchors[i]);
  return out;
}

Int eval_basic_cl_ground(const Structure& a, const PredicateRegistry& preds, const BasicClTerm& t,
                         BasicEvalOptions opt) {
  if (t.k == 0) return holds(a, preds, t.psi) ? Int(1) : Int(0);
  Int total = 0;
  for (const auto& v : eval_basic_cl_all(a, preds, t, opt)) total += v;
  return total;
}

// ------------------------------------------------------ numeric recursion

namespace {

Expr reindex(const Expr& psi, const std::vector<int>& vertices, int k) {
  auto ys = canonical_vars(k);
  std::map<Var, Var> sub;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    if (vertices[i] != static_cast<int>(i)) sub[ys[vertices[i]]] = ys[i];
  return sub.empty() ? psi : substitute(psi, sub);
}

bool subset_of(const std::vector<int>& a, const std::vector<int>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::vector<int> complement(const std::vector<int>& a, int k) {
  std::vector<int> out;
  for (int v = 0; v < k; ++v)
    if (!std::binary_search(a.begin(), a.end(), v)) out.push_back(v);
  return out;
}

// Graphs H on the same vertices with H[V1] = G[V1], H[V2] = G[V2] and at
// least one edge between V1 and V2.
std::vector<PatternGraph> cross_extensions(const PatternGraph& g, const std::vector<int>& v1,
                                           const std::vector<int>& v2) {
  std::vector<std::pair<int, int>> cross;
  for (int a : v1)
    for (int b : v2) cross.push_back({a, b});
  std::vector<PatternGraph> out;
  for (std::uint32_t m = 1; m < (1u << cross.size()); ++m) {
    PatternGraph h = g;
    for (std::size_t i = 0; i < cross.size(); ++i)
      if (m >> i & 1) h.add_edge(cross[i].first, cross[i].second);
    out.push_back(h);
  }
  return out;
}

}  // namespace

Int count_pattern(const Structure& a, const PredicateRegistry& preds, const PatternGraph& g, std::int64_t r,
                  const std::map<std::vector<int>, Expr>& component_psi, std::optional<Elem> anchor,
                  BasicEvalOptions opt) {
  int k = g.k();
  auto comps = g.components();
  for (const auto& [key, f] : component_psi) {
    bool inside = false;
    for (const auto& c : comps) inside = inside || subset_of(key, c);
    if (!inside) throw InputError("component formula spans several components of the pattern graph");
  }
  LocalityOptions lo{opt.max_arity};
  if (k == 0 || g.connected()) {
    std::vector<Expr> parts;
    for (const auto& [key, f] : component_psi) parts.push_back(f);
    auto t = make_basic(anchor.has_value(), k, r, g, conj_all(parts), lo);
    return anchor ? eval_basic_cl(a, preds, *t, *anchor, opt) : eval_basic_cl_ground(a, preds, *t, opt);
  }
  auto v1 = g.component_of(0);
  auto v2 = complement(v1, k);
  std::vector<Expr> p1;
  std::map<std::vector<int>, Expr> c2;
  for (const auto& [key, f] : component_psi) {
    if (subset_of(key, v1)) {
      p1.push_back(reindex(f, v1, k));
    } else {
      std::vector<int> nk;
      for (int v : key) nk.push_back(static_cast<int>(std::lower_bound(v2.begin(), v2.end(), v) - v2.begin()));
      c2[nk] = reindex(f, v2, k);
    }
  }
  auto t1 = make_basic(anchor.has_value(), static_cast<int>(v1.size()), r, g.induced(v1), conj_all(p1), lo);
  Int left = anchor ? eval_basic_cl(a, preds, *t1, *anchor, opt) : eval_basic_cl_ground(a, preds, *t1, opt);
  Int right = count_pattern(a, preds, g.induced(v2), r, c2, std::nullopt, opt);
  Int result = left * right;
  for (const auto& h : cross_extensions(g, v1, v2)) {
    std::map<std::vector<int>, Expr> ch;
    for (const auto& c : h.components()) {
      std::vector<Expr> parts;
      for (const auto& [key, f] : component_psi)
        if (subset_of(key, c)) parts.push_back(f);
      ch[c] = conj_all(parts);
    }
    result -= count_pattern(a, preds, h, r, ch, anchor, opt);
  }
  return result;
}

// ----------------------------------------------------- symbolic expansion

namespace {

struct SplitContext {
  std::int64_t r;
  const ExpandOptions& opt;
  std::vector<int> comp_of_anchor;  // component of each centre vertex
  std::vector<int> side_of_anchor;  // 0 for the component of y1, 1 otherwise
};

Placement lookup(const std::map<Var, Placement>& env, Var v) {
  auto it = env.find(v);
  if (it == env.end()) throw UnsupportedError("variable " + v.name() + " is not tied to the centre tuple");
  return it->second;
}

std::map<Var, Placement> enter_block(const Expr& f, const std::vector<Var>& block, const Expr& body,
                                     const std::map<Var, Placement>& env) {
  std::map<Var, Placement> placed;
  if (!place_block(block, body, env, placed))
    throw UnsupportedError("quantifier block " + render(f) + " is not guarded by a conjunct");
  auto inner = env;
  for (const auto& [v, p] : placed) inner[v] = p;
  return inner;
}

// Atoms relating different components of the pattern graph are false on
// tuples with that pattern.
Expr drop_cross(const Expr& f, const std::map<Var, Placement>& env, const SplitContext& ctx) {
  switch (f->kind) {
    case Kind::Atom:
    case Kind::Eq:
    case Kind::Dist: {
      std::int64_t limit = 2 * ctx.r + 1;
      for (std::size_t i = 0; i < f->vars.size(); ++i)
        for (std::size_t j = i + 1; j < f->vars.size(); ++j) {
          Placement a = lookup(env, f->vars[i]), b = lookup(env, f->vars[j]);
          if (ctx.comp_of_anchor[a.anchor] == ctx.comp_of_anchor[b.anchor]) continue;
          std::int64_t span = a.offset + b.offset +
                              (f->kind == Kind::Atom ? 1 : f->kind == Kind::Dist ? std::int64_t(f->bound) : 0);
          if (span > limit)
            throw UnsupportedError("atom " + render(f) + " may hold across separated components");
          return mk_false();
        }
      return f;
    }
    case Kind::Not:
      return negate(drop_cross(f->kids[0], env, ctx));
    case Kind::Or:
      return disj(drop_cross(f->kids[0], env, ctx), drop_cross(f->kids[1], env, ctx));
    case Kind::Exists: {
      if (f->free.empty()) return f;
      auto [block, body] = exists_block(f);
      auto inner = enter_block(f, block, body, env);
      return exists_all(block, drop_cross(body, inner, ctx));
    }
    case Kind::Pred:
      if (!f->free.empty()) throw UnsupportedError("predicate with free variables in a local formula");
      return f;
    default:
      return f;
  }
}

// Sides (bit 0: side 0, bit 1: side 1) of the free variables of f.
int sides_of(const Expr& f, const std::map<Var, Placement>& env, const SplitContext& ctx) {
  int s = 0;
  for (Var v : f->free) s |= 1 << ctx.side_of_anchor[lookup(env, v).anchor];
  return s;
}

void collect_pieces(const Expr& f, int side, const std::map<Var, Placement>& env, const SplitContext& ctx,
                    std::vector<Expr>& out) {
  int s = sides_of(f, env, ctx);
  if ((s & (1 << side)) == 0) return;
  if (s == (1 << side)) {
    for (const auto& o : out)
      if (structurally_equal(o, f)) return;
    out.push_back(f);
    return;
  }
  if (f->kind != Kind::Not && f->kind != Kind::Or)
    throw UnsupportedError("cannot separate " + render(f) + " into independent parts");
  for (const auto& k : f->kids) collect_pieces(k, side, env, ctx, out);
}

// All truth assignments to the pieces, as (literal conjunction, residue).
std::vector<std::pair<Expr, Expr>> shannon(const Expr& f, const std::vector<Expr>& pieces, const SplitContext& ctx) {
  if (static_cast<int>(pieces.size()) > ctx.opt.max_split_pieces)
    throw UnsupportedError("too many subformulas to separate (" + std::to_string(pieces.size()) + ")");
  std::vector<std::pair<Expr, Expr>> out;
  for (std::uint32_t m = 0; m < (1u << pieces.size()); ++m) {
    std::vector<Expr> lits, vals;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      bool b = m >> i & 1;
      lits.push_back(b ? pieces[i] : negate(pieces[i]));
      vals.push_back(b ? mk_true() : mk_false());
    }
    Expr rest = simplify(replace_subformulas(f, pieces, vals));
    if (is_false(rest)) continue;
    out.push_back({conj_all(lits), rest});
  }
  return out;
}

// Rewrites quantifier blocks whose bodies mention both sides into Boolean
// combinations of blocks that mention one side only.
Expr purify(const Expr& f, const std::map<Var, Placement>& env, const SplitContext& ctx) {
  int s = sides_of(f, env, ctx);
  if (s != 3) return f;
  switch (f->kind) {
    case Kind::Not:
      return negate(purify(f->kids[0], env, ctx));
    case Kind::Or:
      return disj(purify(f->kids[0], env, ctx), purify(f->kids[1], env, ctx));
    case Kind::Exists: {
      auto [block, body] = exists_block(f);
      auto inner = enter_block(f, block, body, env);
      int bs = 0;
      for (Var v : block) bs |= 1 << ctx.side_of_anchor[inner.at(v).anchor];
      if (bs == 3) throw UnsupportedError("quantifier block " + render(f) + " is tied to both parts");
      int own = bs == 1 ? 0 : 1;
      Expr b = purify(body, inner, ctx);
      std::vector<Expr> pieces;
      collect_pieces(b, 1 - own, inner, ctx, pieces);
      std::vector<Expr> alts;
      for (const auto& [lits, rest] : shannon(b, pieces, ctx)) alts.push_back(conj(lits, exists_all(block, rest)));
      return disj_all(alts);
    }
    default:
      throw UnsupportedError("cannot separate " + render(f) + " into independent parts");
  }
}

struct ExpandCache {
  std::mutex mu;
  std::unordered_map<std::string, ClPolynomial> map;
};

ExpandCache& expand_cache() {
  static ExpandCache c;
  return c;
}

}  // namespace

ClPolynomial expand_pattern(bool unary, int k, std::int64_t r, const PatternGraph& g, const Expr& psi_in,
                            ExpandOptions opt) {
  Expr psi = simplify(psi_in);
  if (is_false(psi)) return {};
  if (k == 0) {
    if (is_true(psi)) return ClPolynomial::constant(Int(1));
    return ClPolynomial::basic(make_basic(false, 0, r, g, psi, opt.locality));
  }
  std::string key = std::string(unary ? "u" : "g") + std::to_string(k) + ":" + std::to_string(r) + ":" +
                    std::to_string(g.mask()) + ":" + std::to_string(opt.locality.max_arity) + ":" +
                    render(psi, {.sugar = false});
  {
    auto& c = expand_cache();
    std::lock_guard<std::mutex> lock(c.mu);
    if (auto it = c.map.find(key); it != c.map.end()) return it->second;
  }
  ClPolynomial result;
  if (g.connected()) {
    if (unary && k == 1) {
      auto ys = canonical_vars(2);
      PatternGraph e(2);
      e.add_edge(0, 1);
      result = ClPolynomial::basic(make_basic(true, 2, r, e, conj(psi, mk_eq(ys[1], ys[0])), opt.locality));
    } else {
      result = ClPolynomial::basic(make_basic(unary, k, r, g, psi, opt.locality));
    }
  } else {
    auto v1 = g.component_of(0);
    auto v2 = complement(v1, k);
    SplitContext ctx{r, opt, std::vector<int>(k), std::vector<int>(k, 1)};
    auto comps = g.components();
    for (std::size_t c = 0; c < comps.size(); ++c)
      for (int v : comps[c]) ctx.comp_of_anchor[v] = static_cast<int>(c);
    for (int v : v1) ctx.side_of_anchor[v] = 0;
    auto ys = canonical_vars(k);
    std::map<Var, Placement> env;
    for (int i = 0; i < k; ++i) env[ys[i]] = Placement{i, 0};

    Expr dropped = miniscope(simplify(drop_cross(psi, env, ctx)));
    Expr pure = simplify(purify(dropped, env, ctx));

    // Split into mutually exclusive (side 0, side 1) pairs.
    std::vector<Expr> p0, p1, mixed;
    for (const auto& c : conjuncts(pure)) {
      int s = sides_of(c, env, ctx);
      if (s == 3)
        mixed.push_back(c);
      else if (s == 2)
        p1.push_back(c);
      else
        p0.push_back(c);
    }
    std::vector<std::pair<Expr, Expr>> branches;
    if (mixed.empty()) {
      branches.push_back({conj_all(p0), conj_all(p1)});
    } else {
      Expr m = conj_all(mixed);
      std::vector<Expr> pieces;
      collect_pieces(m, 0, env, ctx, pieces);
      std::vector<std::pair<Expr, std::vector<Expr>>> groups;  // residue -> literal conjunctions
      for (auto& [lits, rest] : shannon(m, pieces, ctx)) {
        bool found = false;
        for (auto& [res, ls] : groups)
          if (structurally_equal(res, rest)) {
            ls.push_back(lits);
            found = true;
            break;
          }
        if (!found) groups.push_back({rest, {lits}});
      }
      for (auto& [rest, ls] : groups) {
        auto left = p0;
        left.push_back(disj_all(ls));
        auto right = p1;
        right.push_back(rest);
        branches.push_back({conj_all(left), conj_all(right)});
      }
    }
    PatternGraph g1 = g.induced(v1), g2 = g.induced(v2);
    for (const auto& [left, right] : branches) {
      if (is_false(simplify(left)) || is_false(simplify(right))) continue;
      auto t1 = expand_pattern(unary, static_cast<int>(v1.size()), r, g1, reindex(left, v1, k), opt);
      auto t2 = expand_pattern(false, static_cast<int>(v2.size()), r, g2, reindex(right, v2, k), opt);
      result = result + t1 * t2;
    }
    for (const auto& h : cross_extensions(g, v1, v2)) result = result - expand_pattern(unary, k, r, h, dropped, opt);
  }
  auto& c = expand_cache();
  std::lock_guard<std::mutex> lock(c.mu);
  if (c.map.size() > 200000) c.map.clear();
  c.map.emplace(key, result);
  return result;
}

ClPolynomial expand_count(bool unary, const std::vector<Var>& ys, const Expr& theta, ExpandOptions opt) {
  int k = static_cast<int>(ys.size());
  if (unary && k == 0) throw InputError("a unary count needs its free variable");
  if (k > opt.max_width)
    throw UnsupportedError("count of width " + std::to_string(k) + " exceeds the supported maximum " +
                           std::to_string(opt.max_width));
  VarSet seen;
  for (Var v : ys)
    if (!seen.insert(v).second) throw InputError("repeated variable " + v.name() + " in a count");
  for (Var v : theta->free)
    if (!seen.count(v)) throw InputError("variable " + v.name() + " is free in a counted formula");
  auto rep = analyze_locality(theta, ys, opt.locality);
  if (!rep.local) throw UnsupportedError("counted formula is not local: " + rep.diagnostic);
  if (!rep.sentences.empty())
    throw UnsupportedError("counted formula contains the sentence " + render(rep.sentences[0]));
  auto cs = canonical_vars(k);
  std::map<Var, Var> sub;
  for (int i = 0; i < k; ++i) sub[ys[i]] = cs[i];
  Expr body = simplify(substitute(normalize_bound(theta), sub));
  ClPolynomial total;
  for (const auto& g : PatternGraph::all(k)) total = total + expand_pattern(unary, k, rep.radius, g, body, opt);
  return total;
}

// -------------------------------------------------------------- dispatch

Dispatch dispatch_sentences(const Expr& phi, const std::vector<Expr>& sentences, const Structure& a,
                            const PredicateRegistry& preds) {
  Dispatch d;
  Evaluator ev(a, preds);
  std::vector<Expr> vals;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (!sentences[i]->free.empty()) throw InputError("dispatch needs sentences");
    bool b = ev.holds(sentences[i]);
    d.truth.push_back(b);
    if (b) d.J.push_back(static_cast<int>(i + 1));
    vals.push_back(b ? mk_true() : mk_false());
  }
  d.residual = simplify(replace_subformulas(phi, sentences, vals));
  return d;
}

Dispatch dispatch_sentences(const Expr& phi, const Structure& a, const PredicateRegistry& preds) {
  return dispatch_sentences(phi, sentence_constituents(phi), a, preds);
}

}  // namespace focq
