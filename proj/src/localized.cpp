#include "focq/localized.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>

#include "focq/covers.hpp"
#include "focq/removal.hpp"

namespace focq {

void LocalizedReport::merge(const LocalizedReport& o) {
  for (auto [d, c] : o.depth_histogram) depth_histogram[d] += c;
  covers += o.covers;
  clusters += o.clusters;
  removals += o.removals;
  direct_evaluations += o.direct_evaluations;
  direct_elements += o.direct_elements;
  largest_cluster = std::max(largest_cluster, o.largest_cluster);
  cap_hits += o.cap_hits;
  fallbacks += o.fallbacks;
  for (const auto& [r, c] : o.fallback_reasons) fallback_reasons[r] += c;
  max_depth = std::max(max_depth, o.max_depth);
}

namespace {

std::uint32_t max_dist_bound(const Expr& e) {
  std::uint32_t m = e->kind == Kind::Dist ? e->bound : 0;
  for (const auto& k : e->kids) m = std::max(m, max_dist_bound(k));
  return m;
}

// The removal parts of a unary basic cl-term, with the sentence
// constituents of every part body.
struct RemovalPlan {
  std::uint32_t r = 0;
  UnaryRemoval parts;
  std::vector<Expr> sentences;                    // distinct, over all parts
  std::vector<std::vector<std::size_t>> unary_s;  // indices into sentences
  std::vector<std::vector<std::size_t>> ground_s;
};

struct PolyEntry {
  bool ok = false;
  ClPolynomial poly;
  std::string error;
};

class Caches {
 public:
  std::shared_ptr<const RemovalPlan> plan(const BasicClTerm& t) {
    {
      std::lock_guard<std::mutex> lock(m_);
      if (auto it = plans_.find(t.key); it != plans_.end()) return it->second;
    }
    auto p = std::make_shared<RemovalPlan>();
    auto ys = canonical_vars(t.k);
    Expr body = conj(t.psi, delta_formula(t.g, static_cast<std::uint32_t>(t.pattern_radius()), ys));
    p->r = std::max<std::uint32_t>(1, max_dist_bound(body));
    BasicTerm u;
    u.unary = true;
    u.x = ys[0];
    u.ys.assign(ys.begin() + 1, ys.end());
    u.body = body;
    p->parts = removal_unary_term(u, static_cast<int>(p->r));
    std::map<std::string, std::size_t> index;
    auto collect = [&](const std::vector<BasicTerm>& parts, std::vector<std::vector<std::size_t>>& out) {
      for (const auto& part : parts) {
        std::vector<std::size_t> ids;
        for (const auto& s : sentence_constituents(part.body)) {
          auto [it, fresh] = index.emplace(render(s), p->sentences.size());
          if (fresh) p->sentences.push_back(s);
          ids.push_back(it->second);
        }
        out.push_back(std::move(ids));
      }
    };
    collect(p->parts.unaries, p->unary_s);
    collect(p->parts.grounds, p->ground_s);
    std::lock_guard<std::mutex> lock(m_);
    return plans_.emplace(t.key, std::move(p)).first->second;
  }

  std::shared_ptr<const PolyEntry> poly(const std::string& key, const std::function<PolyEntry()>& make) {
    {
      std::lock_guard<std::mutex> lock(m_);
      if (auto it = polys_.find(key); it != polys_.end()) return it->second;
    }
    auto e = std::make_shared<const PolyEntry>(make());
    std::lock_guard<std::mutex> lock(m_);
    if (polys_.size() > 100000) polys_.clear();
    return polys_.emplace(key, std::move(e)).first->second;
  }

 private:
  std::mutex m_;
  std::map<std::string, std::shared_ptr<const RemovalPlan>> plans_;
  std::map<std::string, std::shared_ptr<const PolyEntry>> polys_;
};

Caches& caches() {
  static Caches c;
  return c;
}

class Solver {
 public:
  Solver(const PredicateRegistry& preds, const LocalizedConfig& cfg) : preds_(preds), cfg_(cfg) {}

  std::vector<Int> solve(const Structure& b, const BasicClTerm& t, const std::vector<Elem>& wanted, int depth,
                         LocalizedReport& rep) {
    ++rep.depth_histogram[depth];
    rep.max_depth = std::max(rep.max_depth, depth);
    if (wanted.empty()) return {};
    if (t.k == 0) return std::vector<Int>(wanted.size(), holds(b, preds_, t.psi) ? Int(1) : Int(0));
    if (b.size() < cfg_.threshold || b.size() < 2) return direct(b, t, wanted, rep);
    if (depth >= cfg_.recursion_cap) {
      ++rep.cap_hits;
      return direct(b, t, wanted, rep);
    }
    Cover cover = build_cover(b, t.reach());
    ++rep.covers;
    // Anchors in small clusters are evaluated together on b: their
    // reach-balls lie inside their clusters, so only cluster elements are
    // visited.
    std::map<std::uint32_t, std::vector<std::size_t>> by_cluster;
    std::vector<std::size_t> small;
    for (std::size_t i = 0; i < wanted.size(); ++i) {
      auto id = cover.cluster_of[wanted[i]];
      if (cover.clusters[id].size() < cfg_.threshold)
        small.push_back(i);
      else
        by_cluster[id].push_back(i);
    }
    std::vector<std::pair<std::uint32_t, std::vector<std::size_t>>> tasks(by_cluster.begin(), by_cluster.end());

    std::vector<Int> out(wanted.size());
    if (!small.empty()) {
      std::vector<Elem> ws;
      std::set<std::uint32_t> ids;
      for (std::size_t p : small) {
        ws.push_back(wanted[p]);
        ids.insert(cover.cluster_of[wanted[p]]);
      }
      rep.clusters += ids.size();
      for (auto id : ids) rep.largest_cluster = std::max(rep.largest_cluster, cover.clusters[id].size());
      ++rep.direct_evaluations;
      for (auto id : ids) rep.direct_elements += cover.clusters[id].size();
      auto vals = eval_basic_cl_at(b, preds_, t, ws);
      for (std::size_t j = 0; j < small.size(); ++j) out[small[j]] = std::move(vals[j]);
    }
    std::vector<LocalizedReport> reps(tasks.size());
    auto run = [&](std::size_t i) {
      const auto& [id, pos] = tasks[i];
      std::vector<Elem> ws;
      for (std::size_t p : pos) ws.push_back(wanted[p]);
      auto vals = cluster(b, cover, id, t, ws, depth, reps[i]);
      for (std::size_t j = 0; j < pos.size(); ++j) out[pos[j]] = std::move(vals[j]);
    };
    int jobs = depth == 0 ? std::max(1, cfg_.jobs) : 1;
    if (jobs == 1 || tasks.size() < 2) {
      for (std::size_t i = 0; i < tasks.size(); ++i) run(i);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      std::mutex err_m;
      std::exception_ptr err;
      for (int j = 0; j < jobs; ++j)
        pool.emplace_back([&] {
          for (std::size_t i; (i = next++) < tasks.size();) {
            try {
              run(i);
            } catch (...) {
              std::lock_guard<std::mutex> lock(err_m);
              if (!err) err = std::current_exception();
            }
          }
        });
      for (auto& th : pool) th.join();
      if (err) std::rethrow_exception(err);
    }
    for (const auto& r : reps) rep.merge(r);
    return out;
  }

 private:
  void fallback(LocalizedReport& rep, const std::string& why) {
    ++rep.fallbacks;
    ++rep.fallback_reasons[why];
  }

  std::vector<Int> direct(const Structure& b, const BasicClTerm& t, const std::vector<Elem>& wanted,
                          LocalizedReport& rep) {
    ++rep.direct_evaluations;
    rep.direct_elements += b.size();
    return eval_basic_cl_at(b, preds_, t, wanted);
  }

  std::vector<Int> cluster(const Structure& b, const Cover& cover, std::uint32_t id, const BasicClTerm& t,
                           const std::vector<Elem>& ws, int depth, LocalizedReport& rep) {
    const auto& x = cover.clusters[id];
    ++rep.clusters;
    rep.largest_cluster = std::max(rep.largest_cluster, x.size());
    // Each member's reach-ball lies inside the cluster, so its value in the
    // induced substructure is its value in b.
    std::optional<Substructure> sub;
    const Structure* bx = &b;
    std::vector<Elem> local = ws;
    Elem centre = cover.centre[id];
    if (x.size() != b.size()) {
      sub = induced_sub(b, x);
      bx = &sub->structure;
      auto to_local = [&](Elem e) {
        return static_cast<Elem>(std::lower_bound(sub->parent.begin(), sub->parent.end(), e) - sub->parent.begin());
      };
      for (auto& e : local) e = to_local(e);
      centre = to_local(centre);
    }
    if (bx->size() < cfg_.threshold || bx->size() < 2) return direct(*bx, t, local, rep);
    try {
      return via_removal(*bx, centre, t, local, depth, rep);
    } catch (const InputError& e) {
      fallback(rep, std::string("removal not applicable: ") + e.what());
      return direct(*bx, t, local, rep);
    }
  }

  std::vector<Int> via_removal(const Structure& bx, Elem centre, const BasicClTerm& t, const std::vector<Elem>& ws,
                               int depth, LocalizedReport& rep) {
    auto plan = caches().plan(t);
    Elem d = splitter_move(gaifman_adjacency(bx), centre, t.reach(), cfg_.exact_game_cap);
    RemovalStructure rs = remove(bx, d, static_cast<int>(plan->r));
    ++rep.removals;
    const Structure& rem = rs.structure;

    bool need_d = false;
    std::vector<Elem> others;
    for (Elem e : ws) {
      if (e == d)
        need_d = true;
      else
        others.push_back(e > d ? e - 1 : e);
    }

    // Truth values of the sentence constituents on the removed structure.
    std::vector<bool> truth(plan->sentences.size());
    std::vector<bool> needed(plan->sentences.size(), false);
    auto mark = [&](const std::vector<std::vector<std::size_t>>& ids) {
      for (const auto& v : ids)
        for (std::size_t i : v) needed[i] = true;
    };
    if (!others.empty()) mark(plan->unary_s);
    if (need_d) mark(plan->ground_s);
    {
      Evaluator ev(rem, preds_);
      for (std::size_t i = 0; i < truth.size(); ++i)
        if (needed[i]) truth[i] = ev.holds(plan->sentences[i]);
    }

    auto polys_for = [&](bool unary, const std::vector<BasicTerm>& parts,
                         const std::vector<std::vector<std::size_t>>& ids) {
      std::vector<ClPolynomial> out;
      for (std::size_t p = 0; p < parts.size(); ++p) {
        std::string key = t.key + "|" + std::to_string(plan->r) + (unary ? "|u" : "|g") + std::to_string(p) + "|";
        for (std::size_t i : ids[p]) key += truth[i] ? '1' : '0';
        auto entry = caches().poly(key, [&] {
          PolyEntry e;
          try {
            std::vector<Expr> from, to;
            for (std::size_t i : ids[p]) {
              from.push_back(plan->sentences[i]);
              to.push_back(truth[i] ? mk_true() : mk_false());
            }
            Expr residual = simplify(from.empty() ? parts[p].body : replace_subformulas(parts[p].body, from, to));
            std::vector<Var> vars;
            if (unary) vars.push_back(parts[p].x);
            vars.insert(vars.end(), parts[p].ys.begin(), parts[p].ys.end());
            e.poly = expand_count(unary, vars, residual);
            e.ok = true;
          } catch (const InputError& err) {
            e.error = err.what();
          }
          return e;
        });
        if (!entry->ok) throw UnsupportedError(entry->error);
        out.push_back(entry->poly);
      }
      return out;
    };
    std::vector<ClPolynomial> unary_polys, ground_polys;
    if (!others.empty()) unary_polys = polys_for(true, plan->parts.unaries, plan->unary_s);
    if (need_d) ground_polys = polys_for(false, plan->parts.grounds, plan->ground_s);

    // Distinct basics and what is needed of each.
    struct Need {
      BasicClTermPtr term;
      std::vector<Int> at;  // unary: value per element of rem
      Int total;
    };
    std::map<std::string, Need> needs;
    std::map<std::string, int> used;
    for (const auto* group : {&unary_polys, &ground_polys})
      for (const auto& poly : *group)
        for (const auto& bt : poly.basics()) {
          needs.emplace(bt->key, Need{bt, {}, 0});
          collect_relations(bt->psi, used);
        }
    Signature sig;
    for (const auto& s : rem.signature().symbols())
      if (s.arity >= 2 || used.count(s.name)) sig.add(s.name, s.arity);
    Structure red = reduct(rem, sig);
    std::vector<Elem> all(red.size());
    for (Elem e = 0; e < red.size(); ++e) all[e] = e;
    for (auto& [key, need] : needs) {
      const BasicClTerm& bt = *need.term;
      if (bt.unary) {
        auto vals = solve(red, bt, others, depth + 1, rep);
        need.at.assign(red.size(), Int(0));
        for (std::size_t i = 0; i < others.size(); ++i) need.at[others[i]] = std::move(vals[i]);
      } else if (bt.k == 0) {
        need.total = holds(red, preds_, bt.psi) ? Int(1) : Int(0);
      } else {
        for (auto& v : solve(red, bt, all, depth + 1, rep)) need.total += v;
      }
    }

    auto eval_sum = [&](const std::vector<ClPolynomial>& polys, std::optional<Elem> anchor) {
      Int s = 0;
      for (const auto& poly : polys) {
        std::vector<Int> vals;
        for (const auto& bt : poly.basics()) {
          const Need& n = needs.at(bt->key);
          vals.push_back(bt->unary ? n.at[*anchor] : n.total);
        }
        s += poly.evaluate(vals);
      }
      return s;
    };
    std::vector<Int> out;
    out.reserve(ws.size());
    for (Elem e : ws)
      out.push_back(e == d ? eval_sum(ground_polys, std::nullopt) : eval_sum(unary_polys, e > d ? e - 1 : e));
    return out;
  }

  const PredicateRegistry& preds_;
  const LocalizedConfig& cfg_;
};

}  // namespace

std::vector<Int> localized_unary(const Structure& a, const PredicateRegistry& preds, const BasicClTerm& t,
                                 const LocalizedConfig& cfg, LocalizedReport* report) {
  if (t.k == 0) throw InputError("a width-0 term has no anchor");
  LocalizedReport local;
  Solver s(preds, cfg);
  std::vector<Elem> all(a.size());
  for (Elem e = 0; e < a.size(); ++e) all[e] = e;
  auto out = s.solve(a, t, all, 0, local);
  if (report) report->merge(local);
  return out;
}

Int localized_ground(const Structure& a, const PredicateRegistry& preds, const BasicClTerm& t,
                     const LocalizedConfig& cfg, LocalizedReport* report) {
  if (t.k == 0) return holds(a, preds, t.psi) ? Int(1) : Int(0);
  Int total = 0;
  for (const auto& v : localized_unary(a, preds, t, cfg, report)) total += v;
  return total;
}

std::vector<Int> LocalizedEngine::anchor_values(const Structure& a, const BasicClTerm& t) {
  return localized_unary(a, preds_, t, cfg_, &report_);
}

EvaluationOutcome evaluate(const Expr& xi, const Structure& a, const PredicateRegistry& preds,
                           const LocalizedConfig& cfg, DecomposeOptions dopt) {
  ClDecomposition d = cl_decompose(xi, a.signature(), dopt);
  LocalizedEngine engine(preds, cfg);
  EvaluationOutcome out;
  out.value = eval_decomposition(d, a, engine, preds, &out.stats);
  out.report = engine.report();
  out.decomposition_depth = d.depth();
  return out;
}

QueryResult evaluate_query(const Query& q, const Structure& a, const PredicateRegistry& preds,
                           const LocalizedConfig& cfg, LocalizedReport* report, DecomposeOptions dopt) {
  validate_query(q);
  FreeVarElimination fe = eliminate_free_vars(q.body, q.out_terms, q.out_vars);
  Signature sig = a.signature();
  for (const auto& s : fe.symbols) sig.add(s, 1);
  ClDecomposition body = cl_decompose(fe.sentence, sig, dopt);
  std::vector<ClDecomposition> terms;
  for (const auto& t : fe.terms) terms.push_back(cl_decompose(t, sig, dopt));
  LocalizedEngine engine(preds, cfg);
  QueryResult out;
  std::size_t k = q.out_vars.size();
  Tuple tuple(k, 0);
  if (a.size() == 0 && k > 0) return out;
  for (;;) {
    Structure b = expand_with_tuple(a, fe, tuple);
    if (eval_decomposition(body, b, engine, preds).truth) {
      QueryRow row;
      row.elems.assign(tuple.begin(), tuple.end());
      for (const auto& d : terms) row.values.push_back(eval_decomposition(d, b, engine, preds).value);
      out.rows.push_back(std::move(row));
    }
    std::size_t i = k;
    while (i > 0 && ++tuple[i - 1] == a.size()) tuple[--i] = 0;
    if (i == 0) break;
  }
  if (report) report->merge(engine.report());
  return out;
}

}  // namespace focq
