#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "focq/bench.hpp"
#include "focq/corpus.hpp"
#include "focq/covers.hpp"
#include "focq/io.hpp"
#include "focq/parser.hpp"
#include "focq/reductions.hpp"
#include "focq/removal.hpp"

using namespace focq;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Globals {
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string out;
  std::string report;
  std::vector<std::string> oracles;
};

// Where a command takes its structure from.
struct StructureSource {
  std::string file;
  std::string family;
  std::size_t n = 0;
  std::vector<std::string> unary;
  double density = 0.4;

  void add_options(CLI::App* cmd) {
    cmd->add_option("--structure", file, "Structure JSON file");
    cmd->add_option("--family", family,
                    "Generated structure: path, cycle, star, grid, random-tree, maxdeg3; join with '+' for a "
                    "disjoint union");
    cmd->add_option("--n", n, "Size of each generated component");
    cmd->add_option("--unary", unary, "Random unary relations added to a generated structure")->delimiter(',');
    cmd->add_option("--density", density, "Probability of an element being in each added unary relation");
  }

  bool given() const { return !file.empty() || !family.empty(); }

  Structure load(std::uint64_t seed) const {
    if (!file.empty() && !family.empty()) throw InputError("give either --structure or --family, not both");
    if (!file.empty()) return read_structure(file);
    if (family.empty()) throw InputError("a structure is required (--structure FILE or --family NAME --n INT)");
    if (n == 0) throw InputError("--family needs --n");
    Rng rng(seed);
    std::optional<Structure> a;
    std::stringstream ss(family);
    for (std::string part; std::getline(ss, part, '+');) {
      Structure g = family_graph(parse_family(part), n, rng);
      a = a ? disjoint_union(*a, g) : g;
    }
    if (!unary.empty()) a = with_random_unary(*a, unary, density, rng);
    return *a;
  }
};

// Integers above 2^53 are written as decimal strings.
Json int_json(const Int& v) {
  static const Int limit = Int(1) << 53;
  if (v < limit && v > -limit) return Json(static_cast<std::int64_t>(v));
  return Json(v.str());
}

std::string fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void emit(const Globals& g, const Json& j) {
  std::string text = j.dump(2) + "\n";
  if (g.out.empty())
    std::cout << text;
  else
    write_file(g.out, text);
}

void emit_text(const Globals& g, const std::string& text) {
  if (g.out.empty())
    std::cout << text;
  else
    write_file(g.out, text);
}

PredicateRegistry registry(const Globals& g) {
  auto reg = PredicateRegistry::with_builtins();
  for (const auto& spec : g.oracles) register_subprocess_oracle(reg, spec);
  return reg;
}

Json rows_json(const Structure& a, const QueryResult& res) {
  Json rows = Json::array();
  for (const auto& row : res.rows) {
    Json r = Json::array();
    for (Elem e : row.elems) r.push_back(a.name(e));
    for (const auto& v : row.values) r.push_back(int_json(v));
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string text_arg(const std::string& file, const std::string& inline_text, const char* what) {
  if (!file.empty() && !inline_text.empty()) throw InputError(std::string("give either a ") + what + " file or text");
  if (!file.empty()) return read_file(file);
  if (!inline_text.empty()) return inline_text;
  throw InputError(std::string("a ") + what + " is required");
}

Signature parse_signature(const std::string& spec) {
  Signature sig;
  std::stringstream ss(spec);
  for (std::string part; std::getline(ss, part, ',');) {
    auto colon = part.find(':');
    if (colon == std::string::npos) throw InputError("signature entries look like NAME:ARITY");
    int arity;
    try {
      arity = std::stoi(part.substr(colon + 1));
    } catch (const std::exception&) {
      throw InputError("bad arity in signature entry " + part);
    }
    sig.add(part.substr(0, colon), arity);
  }
  return sig;
}

struct EvalOptions {
  StructureSource src;
  std::string query_file, query_text, mode = "local";
  std::string epsilon = "1/2";
  std::vector<int> lambda;
  std::size_t threshold = LocalizedConfig{}.threshold;
  int recursion_cap = LocalizedConfig{}.recursion_cap;
};

double parse_rational(const std::string& s) {
  try {
    auto slash = s.find('/');
    if (slash == std::string::npos) return std::stod(s);
    return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
  } catch (const std::exception&) {
    throw InputError("--epsilon expects a rational such as 1/2 or 0.25");
  }
}

int run_eval(const Globals& g, const EvalOptions& o) {
  if (o.mode != "naive" && o.mode != "local") throw InputError("--mode must be naive or local");
  auto reg = registry(g);
  auto t0 = Clock::now();
  Structure a = o.src.load(g.seed);
  std::string text = text_arg(o.query_file, o.query_text, "query");
  auto parsed = parse(text, a.signature(), reg);
  double load_s = seconds_since(t0);

  LocalizedConfig cfg;
  cfg.jobs = g.jobs;
  cfg.epsilon = parse_rational(o.epsilon);
  cfg.lambda = o.lambda;
  cfg.threshold = o.threshold;
  cfg.recursion_cap = o.recursion_cap;

  Json result;
  std::string kind;
  LocalizedReport rep;
  int ddepth = -1;
  t0 = Clock::now();
  if (auto* q = std::get_if<Query>(&parsed)) {
    kind = "query";
    QueryResult res = o.mode == "naive" ? eval_query(*q, a, reg) : evaluate_query(*q, a, reg, cfg, &rep);
    result = rows_json(a, res);
  } else {
    const Expr& xi = std::get<Expr>(parsed);
    if (!free_vars(xi).empty()) throw InputError("an expression with free variables needs a query head (x,...). φ");
    bool term = xi->is_term();
    kind = term ? "term" : "sentence";
    if (o.mode == "naive") {
      result = term ? int_json(value(a, reg, xi)) : Json(holds(a, reg, xi));
    } else {
      auto out = evaluate(xi, a, reg, cfg);
      rep = out.report;
      ddepth = out.decomposition_depth;
      result = out.value.is_term ? int_json(out.value.value) : Json(out.value.truth);
    }
  }
  double eval_s = seconds_since(t0);

  Json j{{"mode", o.mode}, {"kind", kind}, {"result", result}};
  Json run{{"command", "eval"},
           {"inputs",
            {{"structure", o.src.file.empty() ? Json(o.src.family) : Json(fnv1a(read_file(o.src.file)))},
             {"query", fnv1a(text)}}},
           {"mode", o.mode},
           {"kind", kind},
           {"result", result},
           {"seed", g.seed},
           {"jobs", g.jobs},
           {"structure_size", a.size()},
           {"encoding_size", a.encoding_size()},
           {"timings", {{"load_seconds", load_s}, {"evaluate_seconds", eval_s}}},
           {"oracle_calls", reg.calls()}};
  if (o.mode == "local") {
    Json lr = report_to_json(rep);
    run["epsilon"] = cfg.epsilon;
    run["lambda"] = cfg.lambda;
    run["threshold"] = cfg.threshold;
    run["recursion_cap"] = cfg.recursion_cap;
    run["localized"] = lr;
    run["fallback"] = rep.fallbacks > 0;
    if (ddepth >= 0) run["decomposition_depth"] = ddepth;
    j["recursion_depth_histogram"] = lr["depth_histogram"];
    j["fallback"] = rep.fallbacks > 0;
  }
  if (!g.report.empty()) write_file(g.report, run.dump(2) + "\n");
  emit(g, j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counting first-order query evaluation over sparse structures"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Write the result here instead of stdout");
  app.add_option("--report", g.report, "Write a run report (JSON) here");
  app.add_option("--oracle", g.oracles, "Extra predicate NAME:ARITY:COMMAND answered by a subprocess");

  // eval
  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a sentence, ground term or query");
  ev.src.add_options(eval_cmd);
  eval_cmd->add_option("--query", ev.query_file, "Query file");
  eval_cmd->add_option("--expr", ev.query_text, "Query text");
  eval_cmd->add_option("--mode", ev.mode, "naive or local")->check(CLI::IsMember({"naive", "local"}));
  eval_cmd->add_option("--epsilon", ev.epsilon, "Target exponent slack (recorded in the report)");
  eval_cmd->add_option("--lambda", ev.lambda, "Splitter round bounds per radius (recorded)")->delimiter(',');
  eval_cmd->add_option("--threshold", ev.threshold, "Evaluate structures below this size directly");
  eval_cmd->add_option("--recursion-cap", ev.recursion_cap, "Maximum removal levels");

  // decompose
  StructureSource dec_src;
  std::string dec_file, dec_text, dec_sig;
  auto* dec_cmd = app.add_subcommand("decompose", "Print the cl-decomposition of a sentence or ground term");
  dec_cmd->add_option("--query", dec_file, "Input file");
  dec_cmd->add_option("--expr", dec_text, "Input text");
  dec_cmd->add_option("--signature", dec_sig, "Signature such as E:2,P:1 (default: taken from --structure)");
  dec_cmd->add_option("--structure", dec_src.file, "Structure whose signature is used");

  // cover
  StructureSource cov_src;
  std::int64_t cov_r = 1;
  auto* cov_cmd = app.add_subcommand("cover", "Build and validate an (r,2r) neighbourhood cover");
  cov_src.add_options(cov_cmd);
  cov_cmd->add_option("--r", cov_r, "Radius")->required();

  // game
  StructureSource game_src;
  std::string game_graph;
  std::int64_t game_r = 1;
  int game_rounds = 0;
  std::size_t game_cap = 16;
  auto* game_cmd = app.add_subcommand("game", "Solve the splitter game on a small graph exactly");
  game_src.add_options(game_cmd);
  game_cmd->add_option("--graph", game_graph, "Graph JSON {\"n\":N,\"edges\":[[i,j],...]}");
  game_cmd->add_option("--radius", game_r, "Ball radius")->required();
  game_cmd->add_option("--max-rounds", game_rounds, "Round limit (default: number of vertices)");
  game_cmd->add_option("--cap", game_cap, "Largest graph searched exactly (at most 31)");

  // remove
  StructureSource rem_src;
  std::string rem_elem;
  int rem_r = 1;
  auto* rem_cmd = app.add_subcommand("remove", "Remove an element, recording projections and distance halos");
  rem_src.add_options(rem_cmd);
  rem_cmd->add_option("--element", rem_elem, "Element name")->required();
  rem_cmd->add_option("--r", rem_r, "Halo radius")->required();

  // transform
  std::string tr_file, tr_text, tr_sig, tr_structure;
  std::vector<std::string> tr_vars;
  int tr_r = 1;
  auto* tr_cmd = app.add_subcommand("transform", "Rewrite a first-order formula for a removal structure");
  tr_cmd->add_option("--formula", tr_file, "Formula file");
  tr_cmd->add_option("--expr", tr_text, "Formula text");
  tr_cmd->add_option("--signature", tr_sig, "Signature such as E:2,P:1");
  tr_cmd->add_option("--structure", tr_structure, "Structure whose signature is used");
  tr_cmd->add_option("--V", tr_vars, "Variables interpreted by the removed element")->delimiter(',');
  tr_cmd->add_option("--r", tr_r, "Halo radius")->required();

  // reduce
  std::string red_kind, red_graph, red_formula, red_out;
  auto* red_cmd = app.add_subcommand("reduce", "Encode a graph as a tree or string structure");
  red_cmd->add_option("kind", red_kind, "tree or string")->required()->check(CLI::IsMember({"tree", "string"}));
  red_cmd->add_option("--graph", red_graph, "Graph JSON")->required();
  red_cmd->add_option("--formula", red_formula, "Sentence over {E} to rewrite");
  red_cmd->add_option("--out", red_out, "Output directory")->required();

  // bench
  std::vector<std::string> bench_fams{"star", "path"};
  std::vector<std::size_t> bench_sizes{1000, 10000, 100000};
  std::size_t bench_cap = 10000;
  std::string bench_format = "json";
  auto* bench_cmd = app.add_subcommand("bench", "Scaling of localized and naive counting for a width-2 term");
  bench_cmd->add_option("--family", bench_fams, "Families")->delimiter(',');
  bench_cmd->add_option("--sizes", bench_sizes, "Sizes")->delimiter(',');
  bench_cmd->add_option("--naive-cap", bench_cap, "Largest size run through the naive evaluator");
  bench_cmd->add_option("--format", bench_format, "json or table")->check(CLI::IsMember({"json", "table"}));

  // selftest
  std::size_t st_count = 200, st_max_n = 60, st_threshold = 8;
  auto* st_cmd = app.add_subcommand("selftest", "Compare naive and local evaluation on the generated corpus");
  st_cmd->add_option("--count", st_count, "Number of inputs");
  st_cmd->add_option("--max-n", st_max_n, "Largest structure outside the grid family");
  st_cmd->add_option("--threshold", st_threshold, "Direct-evaluation threshold of the local mode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*eval_cmd) return run_eval(g, ev);

    if (*dec_cmd) {
      Signature sig;
      if (!dec_sig.empty())
        sig = parse_signature(dec_sig);
      else if (!dec_src.file.empty())
        sig = read_structure(dec_src.file).signature();
      else
        throw InputError("decompose needs --signature or --structure");
      auto reg = registry(g);
      Expr xi = parse_expr(text_arg(dec_file, dec_text, "query"), sig, reg);
      emit(g, decomposition_to_json(cl_decompose(xi, sig)));
      return 0;
    }

    if (*cov_cmd) {
      Structure a = cov_src.load(g.seed);
      Cover c = build_cover(a, cov_r);
      emit(g, cover_to_json(a, c, validate_cover(a, c)));
      return 0;
    }

    if (*game_cmd) {
      Graph gr;
      if (!game_graph.empty()) {
        if (game_src.given()) throw InputError("give either --graph or a structure");
        GraphFile gf = graph_from_json(read_json(game_graph));
        gr.assign(gf.n, {});
        for (auto [u, v] : gf.edges)
          if (u != v) gr[u].push_back(v), gr[v].push_back(u);
        for (auto& adj : gr) {
          std::sort(adj.begin(), adj.end());
          adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
        }
      } else {
        gr = gaifman_adjacency(game_src.load(g.seed));
      }
      int rounds = game_rounds > 0 ? game_rounds : static_cast<int>(gr.size());
      Json j = game_to_json(solve_splitter(gr, game_r, rounds, game_cap));
      j["strategy_source"] = "exact minimax";
      emit(g, j);
      return 0;
    }

    if (*rem_cmd) {
      Structure a = rem_src.load(g.seed);
      auto e = a.find(rem_elem);
      if (!e) throw InputError("no element named " + rem_elem);
      RemovalStructure rs = remove(a, *e, rem_r);
      Json proj = Json::array();
      for (const auto& p : rs.projections) {
        Json pos = Json::array();
        for (int i : p.positions) pos.push_back(i);
        proj.push_back({{"relation", p.rel}, {"positions", pos}, {"symbol", p.symbol}});
      }
      emit(g, {{"removed", rem_elem}, {"r", rem_r}, {"projections", proj}, {"structure", structure_to_json(rs.structure)}});
      return 0;
    }

    if (*tr_cmd) {
      Signature sig;
      if (!tr_sig.empty())
        sig = parse_signature(tr_sig);
      else if (!tr_structure.empty())
        sig = read_structure(tr_structure).signature();
      else
        throw InputError("transform needs --signature or --structure");
      auto reg = registry(g);
      Expr phi = parse_expr(text_arg(tr_file, tr_text, "formula"), sig, reg);
      VarSet V;
      for (const auto& v : tr_vars) V.insert(Var(v));
      emit_text(g, render(removal_formula(phi, V, tr_r)) + "\n");
      return 0;
    }

    if (*red_cmd) {
      GraphFile gf = graph_from_json(read_json(red_graph));
      std::filesystem::create_directories(red_out);
      auto dir = std::filesystem::path(red_out);
      Structure s = red_kind == "tree" ? encode_tree(gf.n, gf.edges).tree : encode_string(gf.n, gf.edges).structure;
      write_file((dir / "structure.json").string(), structure_to_json(s).dump(2) + "\n");
      Json j{{"kind", red_kind}, {"structure", (dir / "structure.json").string()}, {"size", s.size()}};
      if (red_kind == "tree") j["height"] = encode_tree(gf.n, gf.edges).height;
      if (red_kind == "string") j["word"] = encode_string(gf.n, gf.edges).word;
      if (!red_formula.empty()) {
        auto reg = registry(g);
        Expr phi = parse_expr(read_file(red_formula), Signature{{"E", 2}}, reg);
        Expr hat = red_kind == "tree" ? rewrite_tree_formula(phi) : rewrite_string_formula(phi);
        write_file((dir / "formula.foc").string(), render(hat) + "\n");
        j["formula"] = (dir / "formula.foc").string();
      }
      emit(g, j);
      return 0;
    }

    if (*bench_cmd) {
      LocalizedConfig cfg;
      cfg.jobs = g.jobs;
      Json out = Json::array();
      std::ostringstream table;
      table << std::left << std::setw(8) << "family" << std::right << std::setw(10) << "n" << std::setw(14)
            << "local_s" << std::setw(14) << "naive_s" << std::setw(14) << "value" << "\n";
      for (const auto& fam : bench_fams) {
        BenchResult r = run_bench(parse_family(fam), bench_sizes, g.seed, cfg, bench_cap);
        Json rows = Json::array();
        for (const auto& row : r.rows) {
          Json rj{{"n", row.n}, {"local_seconds", row.local_seconds}, {"local_value", int_json(row.local_value)}};
          rj["naive_seconds"] = row.naive_seconds ? Json(*row.naive_seconds) : Json(nullptr);
          rj["naive_value"] = row.naive_value ? int_json(*row.naive_value) : Json(nullptr);
          rj["report"] = report_to_json(row.report);
          rows.push_back(rj);
          table << std::left << std::setw(8) << r.family << std::right << std::setw(10) << row.n << std::setw(14)
                << row.local_seconds << std::setw(14)
                << (row.naive_seconds ? std::to_string(*row.naive_seconds) : std::string("-")) << std::setw(14)
                << row.local_value << "\n";
        }
        auto slope = [](const std::optional<double>& s) { return s ? Json(*s) : Json(nullptr); };
        out.push_back({{"family", r.family},
                       {"term", r.term},
                       {"naive_cap", r.naive_cap},
                       {"rows", rows},
                       {"local_slope", slope(r.local_slope)},
                       {"naive_slope", slope(r.naive_slope)}});
        table << r.family << " slopes: local "
              << (r.local_slope ? std::to_string(*r.local_slope) : std::string("n/a")) << ", naive "
              << (r.naive_slope ? std::to_string(*r.naive_slope) : std::string("n/a")) << "\n";
      }
      Json j{{"command", "bench"}, {"seed", g.seed}, {"families", out}};
      if (!g.report.empty()) write_file(g.report, j.dump(2) + "\n");
      if (bench_format == "table")
        emit_text(g, table.str());
      else
        emit(g, j);
      return 0;
    }

    if (*st_cmd) {
      auto reg = registry(g);
      std::size_t rejected = 0;
      auto corpus = acceptance_corpus(st_count, g.seed, st_max_n, &rejected);
      LocalizedConfig cfg;
      cfg.jobs = g.jobs;
      cfg.threshold = st_threshold;
      std::size_t passed = 0, failed = 0, fallbacks = 0;
      Json failures = Json::array();
      auto t0 = Clock::now();
      for (const auto& item : corpus) {
        auto out = evaluate(item.input, item.structure, reg, cfg);
        bool ok = out.value.is_term ? out.value.value == value(item.structure, reg, item.input)
                                    : out.value.truth == holds(item.structure, reg, item.input);
        fallbacks += out.report.fallbacks;
        if (ok) {
          ++passed;
        } else {
          ++failed;
          failures.push_back({{"family", item.family}, {"input", render(item.input)}});
        }
      }
      Json j{{"command", "selftest"}, {"seed", g.seed},        {"passed", passed},
             {"failed", failed},      {"rejected", rejected},  {"fallbacks", fallbacks},
             {"seconds", seconds_since(t0)}, {"failures", failures}};
      if (!g.report.empty()) write_file(g.report, j.dump(2) + "\n");
      std::cerr << "selftest: " << passed << " passed, " << failed << " failed\n";
      emit(g, j);
      return failed == 0 ? 0 : 2;
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
