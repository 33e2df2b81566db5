#include "focq/corpus.hpp"

#include "focq/decompose.hpp"

namespace focq {

Signature corpus_signature() { return Signature{{"E", 2}, {"P", 1}, {"Q", 1}}; }

namespace {

class Gen {
 public:
  Gen(Rng& rng, Fo1cGenOptions opt) : rng_(rng), opt_(opt) {}

  Expr sentence() {
    int d = opt_.max_count_depth;
    Expr s = part(d);
    if (coin(0.4)) s = coin(0.5) ? mk_and(s, part(d)) : mk_or(s, part(d));
    return coin(0.2) ? mk_not(s) : s;
  }

  Expr ground_term(int depth) {
    Expr t = ground_count(depth);
    if (coin(0.3)) t = mk_add(t, mk_mul(mk_const(1 + pick(3)), ground_count(depth)));
    return t;
  }

 private:
  int pick(int n) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }
  bool coin(double p) { return std::uniform_real_distribution<double>(0, 1)(rng_) < p; }
  Var fresh() { return Var("v" + std::to_string(++counter_)); }
  Var any(const std::vector<Var>& f) { return f[pick(static_cast<int>(f.size()))]; }

  Expr part(int d) {
    if (coin(0.6)) {
      Var x = fresh();
      Expr body = mk_and(local({x}, d - 1, 1, 1 + pick(2)), pred_atom(x, d));
      return coin(0.7) ? mk_exists(x, body) : mk_forall(x, mk_or(mk_not(local({x}, 0, 0, 1)), pred_atom(x, d)));
    }
    switch (pick(4)) {
      case 0:
        return mk_pred("prime", {ground_term(d)});
      case 1:
        return mk_pred("eq", {ground_term(d), ground_term(d)});
      case 2:
        return mk_pred("leq", {ground_term(d), ground_term(d)});
      default:
        return mk_geq1(ground_term(d));
    }
  }

  Expr atom(const std::vector<Var>& f) {
    switch (pick(f.size() >= 2 ? 6 : 3)) {
      case 0:
        return mk_atom("P", {any(f)});
      case 1:
        return mk_atom("Q", {any(f)});
      case 2:
        return mk_atom("E", {any(f), any(f)});
      case 3:
        return mk_eq(any(f), any(f));
      case 4:
        return mk_dist(any(f), any(f), 1 + pick(2));
      default:
        return mk_atom("E", {any(f), any(f)});
    }
  }

  Expr local(const std::vector<Var>& f, int depth, int qdepth, int size) {
    if (size <= 1) {
      if (depth > 0 && coin(0.25)) return pred_atom(any(f), depth);
      if (qdepth > 0 && coin(0.3)) {
        Var v = any(f), w = fresh();
        auto g = f;
        g.push_back(w);
        return mk_exists(w, mk_and(mk_atom("E", {v, w}), local(g, depth, qdepth - 1, 1 + pick(2))));
      }
      return atom(f);
    }
    int left = 1 + pick(size - 1);
    switch (pick(3)) {
      case 0:
        return mk_not(local(f, depth, qdepth, size));
      case 1:
        return mk_and(local(f, depth, qdepth, left), local(f, depth, qdepth, size - left));
      default:
        return mk_or(local(f, depth, qdepth, left), local(f, depth, qdepth, size - left));
    }
  }

  // Term with the single free variable v and #-depth at most depth.
  Expr unary_term(Var v, int depth) {
    int w = 1 + pick(std::max(1, std::min(2, opt_.max_width)));
    std::vector<Var> ys, f{v};
    Expr guard = mk_true();
    for (int i = 0; i < w; ++i) {
      Var y = fresh();
      Var from = any(f);
      Expr g = coin(0.8) ? mk_atom("E", {from, y}) : mk_dist(from, y, 2);
      guard = i == 0 ? g : mk_and(guard, g);
      ys.push_back(y);
      f.push_back(y);
    }
    Expr t = mk_count(ys, mk_and(guard, local(f, depth - 1, 1, 1 + pick(3))));
    if (coin(0.2)) t = mk_add(t, mk_const(pick(3)));
    return t;
  }

  Expr pred_atom(Var v, int depth) {
    switch (pick(5)) {
      case 0:
        return mk_pred("prime", {unary_term(v, depth)});
      case 1:
        return mk_pred("eq", {unary_term(v, depth), unary_term(v, depth)});
      case 2:
        return mk_pred("leq", {unary_term(v, depth), mk_const(1 + pick(3))});
      case 3:
        return mk_pred("geq1", {unary_term(v, depth)});
      default:
        return mk_geq1(unary_term(v, depth));
    }
  }

  Expr ground_count(int depth) {
    int w = 1 + pick(std::max(1, opt_.max_width));
    std::vector<Var> ys;
    Expr guard = mk_true();
    for (int i = 0; i < w; ++i) {
      Var y = fresh();
      // Later variables are usually tied to an earlier one.
      if (i > 0 && (w == 3 || coin(0.7))) {
        Expr g = mk_atom("E", {any(ys), y});
        guard = is_true(guard) ? g : mk_and(guard, g);
      }
      ys.push_back(y);
    }
    Expr body = local(ys, depth - 1, 1, 1 + pick(3));
    return mk_count(ys, is_true(guard) ? body : mk_and(guard, body));
  }

  Rng& rng_;
  Fo1cGenOptions opt_;
  int counter_ = 0;
};

}  // namespace

Expr random_fo_formula(Rng& rng, int rank, int size, int max_dist, const std::vector<Var>& pool,
                       const std::vector<std::string>& unary) {
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  auto v = [&] { return pool[pick(pool.size())]; };
  if (size <= 1) {
    switch (pick(unary.empty() ? 4 : 5)) {
      case 0:
      case 1:
        return mk_atom("E", {v(), v()});
      case 2:
        return mk_eq(v(), v());
      case 3:
        return mk_dist(v(), v(), static_cast<std::uint32_t>(pick(max_dist + 1)));
      default:
        return mk_atom(unary[pick(unary.size())], {v()});
    }
  }
  std::size_t c = pick(rank > 0 ? 4 : 3);
  if (c == 0) return mk_not(random_fo_formula(rng, rank, size - 1, max_dist, pool, unary));
  if (c == 1 || c == 2) {
    int left = 1 + static_cast<int>(pick(size - 1));
    auto a = random_fo_formula(rng, rank, left, max_dist, pool, unary);
    auto b = random_fo_formula(rng, rank, size - left, max_dist, pool, unary);
    return c == 1 ? mk_or(a, b) : mk_and(a, b);
  }
  return mk_exists(v(), random_fo_formula(rng, rank - 1, size - 1, max_dist, pool, unary));
}

Structure random_digraph(Rng& rng, std::size_t n, int arc_percent) {
  std::vector<Edge> arcs;
  for (Elem i = 0; i < n; ++i)
    for (Elem j = 0; j < n; ++j)
      if (static_cast<int>(rng() % 100) < arc_percent) arcs.push_back({i, j});
  return with_random_unary(graph_structure(n, arcs, true), {"P"}, 0.4, rng);
}

Expr random_fo1c_sentence(Rng& rng, Fo1cGenOptions opt) {
  if (opt.max_count_depth < 1) throw InputError("generated inputs need #-depth at least 1");
  return Gen(rng, opt).sentence();
}

Expr random_fo1c_ground_term(Rng& rng, Fo1cGenOptions opt) {
  if (opt.max_count_depth < 1) throw InputError("generated inputs need #-depth at least 1");
  return Gen(rng, opt).ground_term(opt.max_count_depth);
}

std::vector<CorpusItem> acceptance_corpus(std::size_t count, std::uint64_t seed, std::size_t max_n,
                                          std::size_t* rejected) {
  Rng rng(seed);
  std::vector<CorpusItem> out;
  const Family fams[] = {Family::RandomTree, Family::Grid, Family::MaxDegree3, Family::Star};
  std::size_t rej = 0;
  for (std::size_t i = 0; i < count; ++i) {
    Family f = fams[i % 4];
    std::size_t n = f == Family::Grid ? 100 : 10 + rng() % (max_n > 10 ? max_n - 9 : 1);
    Structure base = with_random_unary(family_graph(f, n, rng), {"P", "Q"}, 0.4, rng);
    for (;;) {
      Expr x = rng() % 10 < 7 ? random_fo1c_sentence(rng) : random_fo1c_ground_term(rng);
      try {
        cl_decompose(x, corpus_signature());
      } catch (const InputError&) {
        ++rej;
        continue;
      }
      out.push_back({family_name(f), base, x});
      break;
    }
  }
  if (rejected) *rejected = rej;
  return out;
}

}  // namespace focq
