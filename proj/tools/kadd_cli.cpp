// kadd: exact Shapley values, k-additive approximation, and benchmarks from
// the command line.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kadd/kadd.hpp"

namespace {

using namespace kadd;
using json = nlohmann::json;

constexpr int kExitUsage = 2;
constexpr int kExitGame = 3;

struct GameSource {
  std::string game;
  std::string table;
  std::string oracle;
  int players = 0;
  std::string data;
  int bins = 4;
  double log_base = std::numbers::e;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--game", game, "built-in game family:params, e.g. unanimity:n=3,S=1,2");
    cmd.add_option("--table", table, "value-table file");
    cmd.add_option("--oracle", oracle, "oracle command line (whitespace separated)");
    cmd.add_option("--players", players, "player count for --oracle");
    cmd.add_option("--data", data, "CSV data for the total-correlation game");
    cmd.add_option("--bins", bins, "equal-width bins for --data")->capture_default_str();
    cmd.add_option("--log-base", log_base, "entropy logarithm base for --data");
  }
};

/// `key=v1,v2,...` lists; bare tokens extend the previous key.
std::map<std::string, std::vector<std::string>> parse_params(const std::string& text) {
  std::map<std::string, std::vector<std::string>> out;
  std::string current;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto eq = tok.find('=');
    if (eq != std::string::npos) {
      current = tok.substr(0, eq);
      out[current].push_back(tok.substr(eq + 1));
    } else {
      if (current.empty()) throw std::invalid_argument("game parameter '" + tok + "' lacks a key");
      out[current].push_back(tok);
    }
  }
  return out;
}

int to_int(const std::string& s) {
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(s, &pos);
  } catch (const std::logic_error&) {
    throw std::invalid_argument("expected an integer, got '" + s + "'");
  }
  if (pos != s.size()) throw std::invalid_argument("expected an integer, got '" + s + "'");
  return v;
}

double to_real(const std::string& s) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::logic_error&) {
    throw std::invalid_argument("expected a number, got '" + s + "'");
  }
  if (pos != s.size()) throw std::invalid_argument("expected a number, got '" + s + "'");
  return v;
}

GamePtr make_family(const std::string& spec, const GameSource& src) {
  const auto colon = spec.find(':');
  const std::string family = spec.substr(0, colon);
  const auto params = parse_params(colon == std::string::npos ? "" : spec.substr(colon + 1));
  auto one = [&](const std::string& key) -> const std::string& {
    auto it = params.find(key);
    if (it == params.end() || it->second.size() != 1)
      throw std::invalid_argument(family + " game needs exactly one value for " + key);
    return it->second.front();
  };
  auto list = [&](const std::string& key) -> const std::vector<std::string>& {
    auto it = params.find(key);
    if (it == params.end()) throw std::invalid_argument(family + " game needs " + key);
    return it->second;
  };
  auto players_of = [&](const std::string& key, int n) {
    std::vector<int> p;
    for (const auto& s : list(key)) p.push_back(to_int(s));
    return from_players(p, n);
  };

  if (family == "additive") {
    std::vector<double> c;
    for (const auto& s : list("c")) c.push_back(to_real(s));
    return make_additive(c);
  }
  if (family == "unanimity") {
    const int n = to_int(one("n"));
    check_players(n);
    return make_unanimity(n, players_of("S", n));
  }
  if (family == "glove") {
    const int n = to_int(one("n"));
    check_players(n);
    return make_glove(n, players_of("left", n));
  }
  if (family == "random") {
    const int n = to_int(one("n"));
    const auto seed = params.contains("seed") ? static_cast<std::uint64_t>(to_int(one("seed"))) : 0;
    return make_table_game(random_table(n, seed));
  }
  if (family == "kadditive") {
    const int n = to_int(one("n"));
    check_players(n);
    const auto seed = params.contains("seed") ? static_cast<std::uint64_t>(to_int(one("seed"))) : 0;
    return random_kadditive_game(n, to_int(one("k")), seed);
  }
  if (family == "totalcorr") {
    if (src.data.empty()) throw std::invalid_argument("totalcorr game needs --data");
    return total_correlation_game(discretize(read_numeric_csv(src.data), src.bins), src.log_base);
  }
  throw std::invalid_argument("unknown game family '" + family + "'");
}

std::vector<std::string> split_command(const std::string& cmd) {
  std::vector<std::string> out;
  std::istringstream is(cmd);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

GamePtr resolve_game(const GameSource& src) {
  const int given = !src.game.empty() + !src.table.empty() + !src.oracle.empty() +
                    (src.game.empty() && !src.data.empty());
  if (given != 1) throw std::invalid_argument("specify exactly one of --game, --table, --oracle, --data");
  if (!src.game.empty()) return make_family(src.game, src);
  if (!src.table.empty()) return load_value_table(src.table);
  if (!src.data.empty()) return make_family("totalcorr", src);
  if (src.players < 1) throw std::invalid_argument("--oracle requires --players");
  check_players(src.players);
  return open_oracle(src.players, split_command(src.oracle));
}

/// Reaps an oracle child so a failing exit status surfaces as an error.
void finish_game(const GamePtr& g) {
  if (auto o = std::dynamic_pointer_cast<const OracleGame>(g)) o->finish();
}

struct SolverFlags {
  std::string mode = "penalty";
  double penalty_weight = 1e6;
  double rank_tolerance = 1e-10;
  double ridge = 0.0;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--constraint-mode", mode, "penalty or eliminate")->capture_default_str();
    cmd.add_option("--penalty-weight", penalty_weight, "weight of the empty and grand coalition rows")
        ->capture_default_str();
    cmd.add_option("--rank-tolerance", rank_tolerance, "relative rank threshold")->capture_default_str();
    cmd.add_option("--ridge", ridge, "ridge regularization")->capture_default_str();
  }
  SolverOptions options() const {
    SolverOptions o{parse_constraint_mode(mode), penalty_weight, rank_tolerance, ridge};
    o.validate();
    return o;
  }
};

std::string fmt(double v) { return detail::format_real(v); }

std::string output_dir() {
  const char* env = std::getenv("KADD_OUTPUT_DIR");
  return env != nullptr && *env != '\0' ? env : ".";
}

std::string in_output_dir(const std::string& path) {
  if (path.empty() || std::filesystem::path(path).is_absolute() || path.find('/') != std::string::npos) return path;
  return (std::filesystem::path(output_dir()) / path).string();
}

/// Wraps the game so that ν(∅) = 0, reporting whether anything changed.
GamePtr auto_normalize(GamePtr g, bool& normalized, double& shift) {
  shift = (*g)(Coalition{});
  normalized = shift != 0.0;
  return normalized ? normalize(std::move(g)) : g;
}

// ---------------------------------------------------------------------------

struct ExactCmd {
  GameSource src;
  int interactions = 0;
  std::string out;
  bool allow_large = false;

  int run() {
    if (interactions < 0) throw std::invalid_argument("--interactions must be nonnegative");
    auto game = resolve_game(src);
    const int n = game->players();
    if (n > kDefaultPlayerCap && !allow_large) throw std::invalid_argument("exact computation needs --allow-large");
    if (interactions > n) throw std::invalid_argument("--interactions exceeds the player count");

    const auto phi = exact_shapley(*game, allow_large);
    std::ostringstream os;
    os << "player,phi\n";
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      os << i + 1 << ',' << fmt(phi[static_cast<std::size_t>(i)]) << '\n';
      sum += phi[static_cast<std::size_t>(i)];
    }
    std::cout << os.str() << "sum," << fmt(sum) << '\n';
    if (interactions > 0) {
      InteractionBasis basis(n, interactions);
      std::cout << "# interactions up to order " << interactions << '\n';
      for (Coalition s : basis.subsets()) {
        if (s.empty()) continue;
        const auto m = members(s);
        for (std::size_t t = 0; t < m.size(); ++t) std::cout << (t ? "," : "") << m[t];
        std::cout << ',' << fmt(exact_interaction(*game, s, allow_large)) << '\n';
      }
    }
    if (!out.empty()) {
      std::ofstream f(in_output_dir(out));
      if (!f) throw std::runtime_error("cannot write " + out);
      f << os.str();
    }
    finish_game(game);
    return 0;
  }
};

struct ApproxCmd {
  GameSource src;
  SolverFlags solver;
  std::string method = "svakadd";
  int k = 2;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  std::string emit_interactions;

  int run() {
    auto game = resolve_game(src);
    const int n = game->players();
    auto spec = parse_method_spec(method);
    if (spec.method == Method::svakadd) spec.k = k;
    const auto opts = solver.options();
    const std::size_t total = std::size_t{1} << n;
    if (budget > total) throw std::invalid_argument("budget exceeds 2^n = " + std::to_string(total));
    if (budget < method_min_budget(spec, n)) throw std::invalid_argument("budget below the minimum of " + spec.label());
    if (spec.method == Method::svakadd && (k < 1 || k > n)) throw std::invalid_argument("--k must lie in [1, n]");
    if (!emit_interactions.empty() && spec.method != Method::svakadd)
      throw std::invalid_argument("--emit-interactions applies to svakadd only");

    bool normalized = false;
    double shift = 0.0;
    const GamePtr source = game;
    game = auto_normalize(game, normalized, shift);
    const auto est = run_estimator(*game, spec, budget, seed, opts, !emit_interactions.empty());

    std::cout << "player,estimate\n";
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      std::cout << i + 1 << ',' << fmt(est.values[static_cast<std::size_t>(i)]) << '\n';
      sum += est.values[static_cast<std::size_t>(i)];
    }
    std::cout << "sum," << fmt(sum) << '\n'
              << "evaluations," << est.evaluations << '\n'
              << "underdetermined," << (est.underdetermined ? 1 : 0) << '\n';
    if (normalized) std::cout << "# normalized: subtracted nu(empty) = " << fmt(shift) << '\n';
    if (est.interactions) {
      std::ofstream f(in_output_dir(emit_interactions));
      if (!f) throw std::runtime_error("cannot write " + emit_interactions);
      write_interactions_csv(*est.interactions, f);
    }
    finish_game(source);
    return 0;
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

struct BenchCmd {
  GameSource src;
  SolverFlags solver;
  std::string plan_file;
  std::string methods;
  std::string budgets;
  std::size_t reps = 100;
  std::uint64_t seed = 0;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::string out = "bench.csv";
  std::string plot;
  bool wall_time = false;
  CLI::App* cmd = nullptr;

  bool given(const char* flag) const { return cmd->count(flag) > 0; }

  int run() {
    json plan_json;
    if (!plan_file.empty()) {
      std::ifstream f(plan_file);
      if (!f) throw std::invalid_argument("cannot open plan file " + plan_file);
      try {
        plan_json = json::parse(f);
      } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("bad plan file: ") + e.what());
      }
    }
    // flags > plan file > defaults
    auto pick = [&](const char* flag, const char* key, auto& field) {
      using T = std::decay_t<decltype(field)>;
      if (!given(flag) && plan_json.contains(key)) field = plan_json.at(key).get<T>();
    };
    try {
      pick("--game", "game", src.game);
      pick("--table", "table", src.table);
      pick("--data", "data", src.data);
      pick("--reps", "reps", reps);
      pick("--seed", "seed", seed);
      pick("--workers", "workers", workers);
      pick("--out", "out", out);
      pick("--plot", "plot", plot);
      pick("--constraint-mode", "constraint_mode", solver.mode);
      if (!given("--methods") && plan_json.contains("methods")) {
        methods.clear();
        for (const auto& m : plan_json.at("methods")) methods += (methods.empty() ? "" : ";") + m.get<std::string>();
      }
      if (!given("--budgets") && plan_json.contains("budgets")) {
        budgets.clear();
        for (const auto& b : plan_json.at("budgets"))
          budgets += (budgets.empty() ? "" : ",") + std::to_string(b.get<std::size_t>());
      }
    } catch (const json::exception& e) {
      throw std::invalid_argument(std::string("bad plan file: ") + e.what());
    }

    BenchmarkPlan plan;
    plan.game = resolve_game(src);
    plan.methods = parse_methods(methods);
    for (const auto& b : split_list(budgets)) {
      const int v = to_int(b);
      if (v < 1) throw std::invalid_argument("budgets must be positive");
      plan.budgets.push_back(static_cast<std::size_t>(v));
    }
    plan.repetitions = reps;
    plan.seed_base = seed;
    plan.workers = workers;
    plan.solver = solver.options();
    plan.record_time = wall_time;
    plan.validate();

    bool normalized = false;
    double shift = 0.0;
    const GamePtr source = plan.game;
    plan.game = auto_normalize(plan.game, normalized, shift);
    const auto result = run_benchmark(plan);

    const std::string path = in_output_dir(out);
    emit_csv(result.records, path);
    if (!plot.empty()) emit_plot(result.aggregates, in_output_dir(plot));

    json meta;
    meta["game"] = plan.game->describe();
    meta["players"] = plan.game->players();
    meta["methods"] = json::array();
    for (const auto& m : plan.methods) meta["methods"].push_back(m.label());
    meta["budgets"] = plan.budgets;
    meta["repetitions"] = plan.repetitions;
    meta["seed_base"] = plan.seed_base;
    meta["seed_rule"] = "seed_base + repetition";
    meta["budget_accounting"] = "distinct coalitions evaluated per run; empty and grand coalition count toward T";
    meta["constraint_mode"] = to_string(plan.solver.constraint_mode);
    meta["penalty_weight"] = plan.solver.penalty_weight;
    meta["rank_tolerance"] = plan.solver.rank_tolerance;
    meta["ridge"] = plan.solver.regularization;
    meta["kernelshap_sampling"] = "with replacement, multiplicity weights, until T distinct; efficiency imposed exactly";
    meta["normalized"] = normalized;
    meta["normalization_shift"] = shift;
    meta["wall_time_recorded"] = plan.record_time;
    meta["truth"] = result.truth;
    std::string meta_path = aggregate_path(path);
    meta_path = meta_path.substr(0, meta_path.size() - std::string("-agg.csv").size()) + "-meta.json";
    std::ofstream(meta_path) << meta.dump(2) << '\n';

    write_aggregates_csv(result.aggregates, std::cout);
    finish_game(source);
    return 0;
  }

  static std::vector<MethodSpec> parse_methods(const std::string& s) {
    // entries are separated by ',' or ';'
    std::vector<MethodSpec> out;
    std::string norm = s;
    std::replace(norm.begin(), norm.end(), ';', ',');
    for (const auto& tok : split_list(norm)) {
      if (tok.empty()) continue;
      out.push_back(parse_method_spec(tok));
    }
    if (out.empty()) throw std::invalid_argument("--methods is empty");
    return out;
  }
};

struct GenCmd {
  GameSource src;
  std::string out;

  int run() {
    auto game = resolve_game(src);
    const auto table = tabulate(*game);
    save_value_table(table, in_output_dir(out));
    finish_game(game);
    std::cout << "wrote " << table.values.size() << " values for n=" << table.n << '\n';
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"k-additive Shapley value approximation toolkit"};
  app.require_subcommand(1);

  ExactCmd exact;
  auto* exact_cmd = app.add_subcommand("exact", "exact Shapley values and interaction indices");
  exact.src.add_to(*exact_cmd);
  exact_cmd->add_option("--interactions", exact.interactions, "also print interactions up to this order");
  exact_cmd->add_option("--out", exact.out, "write Shapley values as CSV");
  exact_cmd->add_flag("--allow-large", exact.allow_large, "lift the player cap");

  ApproxCmd approx;
  auto* approx_cmd = app.add_subcommand("approx", "run one estimator");
  approx.src.add_to(*approx_cmd);
  approx.solver.add_to(*approx_cmd);
  approx_cmd->add_option("--method", approx.method, "svakadd, permutation, stratified, kernelshap")
      ->capture_default_str();
  approx_cmd->add_option("--k", approx.k, "additivity degree for svakadd")->capture_default_str();
  approx_cmd->add_option("--budget", approx.budget, "distinct evaluations")->required();
  approx_cmd->add_option("--seed", approx.seed, "random seed")->capture_default_str();
  approx_cmd->add_option("--emit-interactions", approx.emit_interactions, "write all fitted interactions as CSV");

  BenchCmd bench;
  auto* bench_cmd = app.add_subcommand("bench", "MSE benchmark over budgets and repetitions");
  bench.cmd = bench_cmd;
  bench.src.add_to(*bench_cmd);
  bench.solver.add_to(*bench_cmd);
  bench_cmd->add_option("--plan", bench.plan_file, "JSON plan file");
  bench_cmd->add_option("--methods", bench.methods, "e.g. svakadd:k=2,svakadd:k=3,permutation,kernelshap");
  bench_cmd->add_option("--budgets", bench.budgets, "ascending budgets, e.g. 32,64,128");
  bench_cmd->add_option("--reps", bench.reps, "repetitions per budget")->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "seed base")->capture_default_str();
  bench_cmd->add_option("--workers", bench.workers, "worker threads");
  bench_cmd->add_option("--out", bench.out, "records CSV path")->capture_default_str();
  bench_cmd->add_option("--plot", bench.plot, "SVG plot path");
  bench_cmd->add_flag("--wall-time", bench.wall_time, "record wall-clock time per run");

  GenCmd gen;
  auto* gen_cmd = app.add_subcommand("gen", "write a game as a value table");
  gen.src.add_to(*gen_cmd);
  gen_cmd->add_option("--out", gen.out, "value-table path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*exact_cmd) return exact.run();
    if (*approx_cmd) return approx.run();
    if (*bench_cmd) return bench.run();
    if (*gen_cmd) return gen.run();
  } catch (const GameError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitGame;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitUsage;
}
