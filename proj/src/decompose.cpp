#include "focq/decompose.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace focq {

Expr LayerSymbol::definition() const {
  Var z("z");
  std::vector<Expr> ts;
  for (const auto& a : args) ts.push_back(a.to_expr(z));
  return mk_pred(pred, std::move(ts));
}

Signature ClDecomposition::signature_at(std::size_t i) const {
  Signature s = base;
  for (std::size_t l = 0; l < i && l < layers.size(); ++l)
    for (const auto& sym : layers[l].symbols) s.add(sym.name, sym.arity);
  return s;
}

std::size_t ClDecomposition::symbol_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.symbols.size();
  return n;
}

std::int64_t ClDecomposition::max_radius() const {
  std::int64_t r = final_term.radius();
  for (const auto& l : layers)
    for (const auto& s : l.symbols)
      for (const auto& a : s.args) r = std::max(r, a.radius());
  return r;
}

int ClDecomposition::max_width() const {
  int w = final_term.width();
  for (const auto& l : layers)
    for (const auto& s : l.symbols)
      for (const auto& a : s.args) w = std::max(w, a.width());
  return w;
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Expr rebuild_with(const Expr& e, std::vector<Expr> kids) {
  switch (e->kind) {
    case Kind::Not: return mk_not(kids[0]);
    case Kind::Or: return mk_or(kids[0], kids[1]);
    case Kind::Exists: return mk_exists(e->vars[0], kids[0]);
    case Kind::Pred: return mk_pred(e->name, std::move(kids));
    case Kind::Count: return mk_count(e->vars, kids[0]);
    case Kind::Add: return mk_add(kids[0], kids[1]);
    case Kind::Mul: return mk_mul(kids[0], kids[1]);
    default: return e;
  }
}

class Decomposer {
 public:
  Decomposer(const Signature& sig, DecomposeOptions opt) : sig_(sig), opt_(opt) {}

  ClDecomposition run(const Expr& xi) {
    ClDecomposition out;
    out.base = sig_;
    out.is_term = xi->is_term();
    if (!xi->free.empty()) throw InputError("decomposition needs a sentence or a ground term");
    auto fo1c = validate_fo1c(xi);
    if (!fo1c.ok) throw UnsupportedError(fo1c.violations[0].message);
    std::map<std::string, int> rels;
    collect_relations(xi, rels);
    for (const auto& [name, arity] : rels) {
      auto a = sig_.arity_of(name);
      if (!a || *a != arity) throw InputError("relation " + name + " is not in the signature");
    }
    int d = count_depth(xi);
    Expr cur = out.is_term ? simplify(xi) : miniscope(simplify(xi));
    for (int i = 0; i < d; ++i) {
      begin_layer();
      cur = replace_preds(cur);
      if (!out.is_term) cur = miniscope(simplify(cur));
      out.layers.push_back(std::move(layer_));
    }
    begin_layer();
    if (out.is_term)
      out.final_term = final_poly(cur);
    else
      out.final_formula = simplify(lower_sentence(cur));
    out.layers.push_back(std::move(layer_));
    return out;
  }

 private:
  void begin_layer() {
    layer_ = DecompositionLayer{};
    keys_.clear();
  }

  std::string add_symbol(int arity, const std::string& pred, std::vector<ClPolynomial> args, Expr guard) {
    LayerSymbol s;
    s.arity = arity;
    s.pred = pred;
    s.args = std::move(args);
    s.guard = guard;
    std::string key = std::to_string(arity) + "|" + render(s.definition(), {.sugar = false}) + "|" +
                      render(guard, {.sugar = false});
    if (auto it = keys_.find(key); it != keys_.end()) return it->second;
    std::uint64_t h = fnv1a(key);
    std::string name;
    for (;;) {
      char buf[24];
      std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
      name = std::string("R$") + buf;
      if (!sig_.contains(name)) break;
      h = fnv1a(name + key);
    }
    s.name = name;
    sig_.add(name, arity);
    keys_[key] = name;
    layer_.symbols.push_back(std::move(s));
    return name;
  }

  Expr replace_preds(const Expr& e) {
    if (e->kind == Kind::Pred && e->depth == 1) return process_pred(e);
    if (e->depth == 0 || e->kids.empty()) return e;
    std::vector<Expr> kids;
    bool changed = false;
    for (const auto& k : e->kids) {
      kids.push_back(replace_preds(k));
      changed = changed || kids.back() != k;
    }
    return changed ? rebuild_with(e, std::move(kids)) : e;
  }

  static void outer_counts(const Expr& t, std::vector<Expr>& out) {
    if (t->kind == Kind::Count) {
      out.push_back(t);
      return;
    }
    for (const auto& k : t->kids) outer_counts(k, out);
  }

  static void add_unique(std::vector<Expr>& v, const Expr& e) {
    for (const auto& o : v)
      if (structurally_equal(o, e)) return;
    v.push_back(e);
  }

  // Truth assignments J to sentences, with the guard formula over lowered
  // sentences; contradictory guards are dropped.
  std::vector<std::pair<std::vector<bool>, Expr>> splits(const std::vector<Expr>& sentences) {
    if (static_cast<int>(sentences.size()) > opt_.max_sentences)
      throw UnsupportedError("too many sentence constituents (" + std::to_string(sentences.size()) + ") in " +
                             render(sentences[0]) + " ...");
    std::vector<Expr> lowered;
    for (const auto& s : sentences) lowered.push_back(simplify(lower_sentence(s)));
    std::vector<std::pair<std::vector<bool>, Expr>> out;
    for (std::uint32_t m = 0; m < (1u << sentences.size()); ++m) {
      std::vector<bool> truth;
      std::vector<Expr> lits;
      for (std::size_t i = 0; i < sentences.size(); ++i) {
        bool b = m >> i & 1;
        truth.push_back(b);
        lits.push_back(b ? lowered[i] : negate(lowered[i]));
      }
      Expr g = simplify(conj_all(lits));
      if (is_false(g)) continue;
      out.push_back({truth, g});
    }
    return out;
  }

  static Expr assume(const Expr& f, const std::vector<Expr>& sentences, const std::vector<bool>& truth) {
    if (sentences.empty()) return f;
    std::vector<Expr> vals;
    for (bool b : truth) vals.push_back(b ? mk_true() : mk_false());
    return simplify(replace_subformulas(f, sentences, vals));
  }

  ClPolynomial count_poly(const Expr& c, std::optional<Var> y, const std::vector<Expr>& sentences,
                          const std::vector<bool>& truth) {
    Expr theta = miniscope(assume(c->kids[0], sentences, truth));
    bool unary = !c->free.empty();
    if (unary && (!y || c->free.size() != 1 || c->free[0] != *y))
      throw UnsupportedError("count " + render(c) + " has an unexpected free variable");
    std::vector<Var> ys;
    if (unary) ys.push_back(*y);
    ys.insert(ys.end(), c->vars.begin(), c->vars.end());
    try {
      return expand_count(unary, ys, theta, opt_.expand);
    } catch (const UnsupportedError& e) {
      throw UnsupportedError(std::string(e.what()) + " (in " + render(c) + ")");
    }
  }

  ClPolynomial term_poly(const Expr& t, std::optional<Var> y, const std::vector<Expr>& sentences,
                         const std::vector<bool>& truth) {
    switch (t->kind) {
      case Kind::Const: return ClPolynomial::constant(t->value);
      case Kind::Add: return term_poly(t->kids[0], y, sentences, truth) + term_poly(t->kids[1], y, sentences, truth);
      case Kind::Mul: return term_poly(t->kids[0], y, sentences, truth) * term_poly(t->kids[1], y, sentences, truth);
      case Kind::Count: return count_poly(t, y, sentences, truth);
      default: throw InputError("expected a term");
    }
  }

  Expr process_pred(const Expr& pi) {
    if (pi->free.size() > 1)
      throw UnsupportedError("predicate application " + render(pi) + " has more than one free variable");
    std::optional<Var> y;
    if (!pi->free.empty()) y = pi->free[0];
    std::vector<Expr> counts, sentences;
    for (const auto& t : pi->kids) outer_counts(t, counts);
    for (const auto& c : counts)
      for (const auto& s : sentence_constituents(miniscope(c->kids[0]))) add_unique(sentences, s);
    std::vector<Expr> alts;
    for (const auto& [truth, guard] : splits(sentences)) {
      std::vector<ClPolynomial> args;
      for (const auto& t : pi->kids) args.push_back(term_poly(t, y, sentences, truth));
      std::string name = add_symbol(y ? 1 : 0, pi->name, std::move(args), guard);
      Expr atom = y ? mk_atom(name, {*y}) : mk_atom(name, {});
      alts.push_back(conj(guard, atom));
    }
    return disj_all(alts);
  }

  // #ys.theta counting witnesses of an existential sentence. Prefers a
  // single counted variable when the rest of the block stays local.
  std::pair<std::vector<Var>, Expr> witness_count(const Expr& chi) {
    auto [block, body] = exists_block(chi);
    for (std::size_t i = 0; i < block.size(); ++i) {
      std::vector<Var> rest;
      for (std::size_t j = 0; j < block.size(); ++j)
        if (j != i) rest.push_back(block[j]);
      Expr theta = exists_all(rest, body);
      auto rep = analyze_locality(theta, {block[i]}, opt_.expand.locality);
      if (rep.local) return {{block[i]}, theta};
    }
    return {block, body};
  }

  Expr lower_sentence(const Expr& chi) {
    switch (chi->kind) {
      case Kind::True:
      case Kind::False:
        return chi;
      case Kind::Atom:
        if (!chi->vars.empty()) break;
        return chi;
      case Kind::Not:
        return negate(lower_sentence(chi->kids[0]));
      case Kind::Or:
        return disj(lower_sentence(chi->kids[0]), lower_sentence(chi->kids[1]));
      case Kind::Pred: {
        if (chi->depth != 0) break;
        std::vector<ClPolynomial> args;
        for (const auto& t : chi->kids) args.push_back(term_poly(t, std::nullopt, {}, {}));
        return mk_atom(add_symbol(0, chi->name, std::move(args), mk_true()), {});
      }
      case Kind::Exists: {
        if (chi->depth != 0) break;
        auto [vars, theta] = witness_count(normalize_bound(chi));
        std::vector<Expr> sentences;
        for (const auto& s : sentence_constituents(theta)) add_unique(sentences, s);
        std::vector<Expr> alts;
        for (const auto& [truth, guard] : splits(sentences)) {
          Expr body = miniscope(assume(theta, sentences, truth));
          ClPolynomial g;
          try {
            g = expand_count(false, vars, body, opt_.expand);
          } catch (const UnsupportedError& e) {
            throw UnsupportedError(std::string(e.what()) + " (in " + render(chi) + ")");
          }
          if (auto c = g.constant_value()) {
            alts.push_back(*c >= 1 ? guard : mk_false());
            continue;
          }
          std::string name = add_symbol(0, "geq1", {g}, guard);
          alts.push_back(conj(guard, mk_atom(name, {})));
        }
        return disj_all(alts);
      }
      default:
        break;
    }
    throw UnsupportedError("cannot lower " + render(chi) + " to a sentence over fresh symbols");
  }

  // Ground term of #-depth <= 1 whose count bodies may contain sentences;
  // those become 0-ary symbols of the final layer.
  ClPolynomial final_poly(const Expr& t) {
    switch (t->kind) {
      case Kind::Const: return ClPolynomial::constant(t->value);
      case Kind::Add: return final_poly(t->kids[0]) + final_poly(t->kids[1]);
      case Kind::Mul: return final_poly(t->kids[0]) * final_poly(t->kids[1]);
      case Kind::Count: {
        Expr theta = miniscope(t->kids[0]);
        std::vector<Expr> sentences;
        for (const auto& s : sentence_constituents(theta)) add_unique(sentences, s);
        std::vector<Expr> lowered;
        for (const auto& s : sentences) lowered.push_back(simplify(lower_sentence(s)));
        theta = simplify(replace_subformulas(theta, sentences, lowered));
        try {
          return expand_count(false, t->vars, theta, opt_.expand);
        } catch (const UnsupportedError& e) {
          throw UnsupportedError(std::string(e.what()) + " (in " + render(t) + ")");
        }
      }
      default:
        throw InputError("expected a term");
    }
  }

  Signature sig_;
  DecomposeOptions opt_;
  DecompositionLayer layer_;
  std::map<std::string, std::string> keys_;
};

bool eval_guard(const Expr& g, const Structure& a, const std::map<std::string, bool>& local) {
  switch (g->kind) {
    case Kind::True: return true;
    case Kind::False: return false;
    case Kind::Not: return !eval_guard(g->kids[0], a, local);
    case Kind::Or: return eval_guard(g->kids[0], a, local) || eval_guard(g->kids[1], a, local);
    case Kind::Atom: {
      if (auto it = local.find(g->name); it != local.end()) return it->second;
      return a.relation(g->name).size() > 0;
    }
    default:
      throw InputError("guard is not propositional: " + render(g));
  }
}

}  // namespace

ClDecomposition cl_decompose(const Expr& xi, const Signature& sig, DecomposeOptions opt) {
  Decomposer d(sig, opt);
  return d.run(xi);
}

Int ClEngine::ground_value(const Structure& a, const BasicClTerm& t) {
  if (t.k == 0) {
    static const PredicateRegistry none;
    return holds(a, none, t.psi) ? Int(1) : Int(0);
  }
  Int total = 0;
  for (const auto& v : anchor_values(a, t)) total += v;
  return total;
}

std::vector<Int> DirectClEngine::anchor_values(const Structure& a, const BasicClTerm& t) {
  return eval_basic_cl_all(a, preds_, t, opt_);
}

DecompositionValue eval_decomposition(const ClDecomposition& d, const Structure& a, ClEngine& engine,
                                      const PredicateRegistry& preds, DecompositionStats* stats) {
  if (!d.base.subset_of(a.signature()))
    throw InputError("structure signature does not contain the decomposition's signature");
  DecompositionStats local_stats;
  DecompositionStats& st = stats ? *stats : local_stats;
  Structure cur = a;

  struct Values {
    std::vector<Int> anchors;
    Int total;
  };
  auto evaluate_basics = [&](const ClPolynomial& p, std::map<std::string, Values>& cache) {
    for (const auto& b : p.basics()) {
      if (cache.count(b->key)) continue;
      Values v;
      if (b->unary) {
        v.anchors = engine.anchor_values(cur, *b);
      } else {
        v.total = engine.ground_value(cur, *b);
      }
      ++st.basic_terms;
      cache.emplace(b->key, std::move(v));
    }
  };
  auto poly_value = [&](const ClPolynomial& p, std::map<std::string, Values>& cache, Elem e) {
    std::vector<Int> vals;
    for (const auto& b : p.basics()) {
      const auto& v = cache.at(b->key);
      vals.push_back(b->unary ? v.anchors[e] : v.total);
    }
    return p.evaluate(vals);
  };

  for (const auto& layer : d.layers) {
    std::map<std::string, ExtraRelation> extra;
    std::map<std::string, bool> zero;
    std::map<std::string, Values> cache;
    for (const auto& sym : layer.symbols) {
      ExtraRelation rel{sym.arity, {}};
      if (!eval_guard(sym.guard, cur, zero)) {
        ++st.symbols_skipped;
        zero[sym.name] = false;
        extra[sym.name] = std::move(rel);
        continue;
      }
      ++st.symbols_computed;
      for (const auto& p : sym.args) evaluate_basics(p, cache);
      if (sym.arity == 0) {
        std::vector<Int> args;
        for (const auto& p : sym.args) args.push_back(poly_value(p, cache, 0));
        bool b = preds.call(sym.pred, args);
        if (b) rel.tuples.push_back({});
        zero[sym.name] = b;
      } else {
        for (Elem e = 0; e < cur.size(); ++e) {
          std::vector<Int> args;
          for (const auto& p : sym.args) args.push_back(poly_value(p, cache, e));
          if (preds.call(sym.pred, args)) rel.tuples.push_back({e});
        }
      }
      extra[sym.name] = std::move(rel);
    }
    if (!extra.empty()) cur = expand(cur, extra);
  }

  DecompositionValue out;
  out.is_term = d.is_term;
  if (d.is_term) {
    std::map<std::string, Values> cache;
    evaluate_basics(d.final_term, cache);
    out.value = poly_value(d.final_term, cache, 0);
  } else {
    out.truth = holds(cur, preds, d.final_formula);
  }
  return out;
}

}  // namespace focq
