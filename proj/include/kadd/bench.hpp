#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "kadd/baselines.hpp"
#include "kadd/exact.hpp"
#include "kadd/game.hpp"
#include "kadd/svakadd.hpp"

namespace kadd {

enum class Method { svakadd, permutation, stratified, kernelshap };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::svakadd: return "svakadd";
    case Method::permutation: return "permutation";
    case Method::stratified: return "stratified";
    case Method::kernelshap: return "kernelshap";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  if (s == "svakadd") return Method::svakadd;
  if (s == "permutation") return Method::permutation;
  if (s == "stratified") return Method::stratified;
  if (s == "kernelshap") return Method::kernelshap;
  if (s == "stratified-svarm" || s == "adaptive-svarm")
    throw std::invalid_argument("method '" + s + "' is reserved for externally produced curves");
  throw std::invalid_argument("unknown method '" + s + "'");
}

struct MethodSpec {
  Method method = Method::svakadd;
  /// Additivity degree; 1 for kernelshap, 0 for the sampling baselines.
  int k = 0;

  std::string label() const { return to_string(method) + "-k" + std::to_string(k); }
  friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

/// `svakadd:k=3`, `permutation`, `stratified`, `kernelshap`.
inline MethodSpec parse_method_spec(const std::string& s) {
  const auto colon = s.find(':');
  MethodSpec m{parse_method(s.substr(0, colon)), 0};
  if (m.method == Method::kernelshap) m.k = 1;
  if (m.method == Method::svakadd) m.k = 2;
  if (colon != std::string::npos) {
    const std::string rest = s.substr(colon + 1);
    if (rest.rfind("k=", 0) != 0 || m.method != Method::svakadd)
      throw std::invalid_argument("bad method parameters in '" + s + "'");
    try {
      std::size_t pos = 0;
      m.k = std::stoi(rest.substr(2), &pos);
      if (pos != rest.size() - 2) throw std::invalid_argument("k");
    } catch (const std::logic_error&) {
      throw std::invalid_argument("bad additivity degree in '" + s + "'");
    }
  }
  return m;
}

/// Smallest budget each method accepts on an n-player game.
inline std::size_t method_min_budget(const MethodSpec& m, int n) {
  switch (m.method) {
    case Method::svakadd: return 2;
    case Method::permutation: return static_cast<std::size_t>(n);
    case Method::stratified: return 2;
    case Method::kernelshap: return std::min<std::size_t>(static_cast<std::size_t>(n) + 3, std::size_t{1} << n);
  }
  return 2;
}

inline Estimate run_estimator(const Game& game, const MethodSpec& m, std::size_t budget, std::uint64_t seed,
                              const SolverOptions& solver, bool return_interactions = false) {
  switch (m.method) {
    case Method::svakadd:
      return run_svakadd(game, EstimatorConfig{m.k, budget, seed, solver, return_interactions});
    case Method::permutation: return permutation_sampling(game, budget, seed);
    case Method::stratified: return stratified_sampling(game, budget, seed);
    case Method::kernelshap: return kernelshap(game, budget, seed, solver);
  }
  throw std::invalid_argument("unknown method");
}

struct BenchmarkPlan {
  GamePtr game;
  std::vector<MethodSpec> methods;
  std::vector<std::size_t> budgets;
  std::size_t repetitions = 100;
  std::uint64_t seed_base = 0;
  unsigned workers = 1;
  SolverOptions solver;
  /// When false, wall_ms is written as 0 so output files are reproducible.
  bool record_time = false;

  void validate() const {
    if (!game) throw std::invalid_argument("benchmark needs a game");
    const int n = game->players();
    if (n > kDefaultPlayerCap) throw std::invalid_argument("benchmark game exceeds the exact-solver cap");
    if (methods.empty()) throw std::invalid_argument("benchmark needs at least one method");
    if (budgets.empty()) throw std::invalid_argument("benchmark needs at least one budget");
    if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
    if (workers < 1) throw std::invalid_argument("worker count must be at least 1");
    solver.validate();
    const std::size_t total = std::size_t{1} << n;
    for (std::size_t i = 0; i < budgets.size(); ++i) {
      if (i > 0 && budgets[i] <= budgets[i - 1]) throw std::invalid_argument("budgets must be strictly ascending");
      if (budgets[i] > total)
        throw std::invalid_argument("budget " + std::to_string(budgets[i]) + " exceeds 2^n = " + std::to_string(total));
    }
    for (const auto& m : methods) {
      if (m.method == Method::svakadd && (m.k < 1 || m.k > n))
        throw std::invalid_argument("additivity degree out of range for " + m.label());
      if (budgets.front() < method_min_budget(m, n))
        throw std::invalid_argument("budget " + std::to_string(budgets.front()) + " below the minimum of " + m.label());
    }
  }
};

struct BenchmarkRecord {
  std::string method;
  int k = 0;
  std::size_t budget = 0;
  std::size_t repetition = 0;
  double mse = 0.0;
  std::size_t evaluations = 0;
  double wall_ms = 0.0;
  bool underdetermined = false;
  /// Estimate behind the record; not serialized.
  ShapleyVector estimate;

  std::string flags() const { return underdetermined ? "underdetermined" : ""; }
};

struct AggregateRow {
  std::string method;
  int k = 0;
  std::size_t budget = 0;
  double mean_mse = 0.0;
  double stderr_mse = 0.0;
  double median_mse = 0.0;
  std::size_t reps = 0;

  std::string label() const { return method + "-k" + std::to_string(k); }
};

struct BenchmarkResult {
  ShapleyVector truth;
  std::vector<BenchmarkRecord> records;
  std::vector<AggregateRow> aggregates;
};

/// Mean, standard error and median of each (method, k, budget) group, in
/// order of first appearance.
inline std::vector<AggregateRow> aggregate(const std::vector<BenchmarkRecord>& records) {
  std::vector<AggregateRow> rows;
  std::vector<std::vector<double>> groups;
  for (const auto& r : records) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const AggregateRow& a) {
      return a.method == r.method && a.k == r.k && a.budget == r.budget;
    });
    if (it == rows.end()) {
      rows.push_back(AggregateRow{r.method, r.k, r.budget, 0, 0, 0, 0});
      groups.emplace_back();
      it = rows.end() - 1;
    }
    groups[static_cast<std::size_t>(it - rows.begin())].push_back(r.mse);
  }
  for (std::size_t g = 0; g < rows.size(); ++g) {
    auto& v = groups[g];
    const double m = static_cast<double>(v.size());
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / m;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    rows[g].mean_mse = mean;
    rows[g].stderr_mse = v.size() > 1 ? std::sqrt(ss / (m - 1.0)) / std::sqrt(m) : 0.0;
    rows[g].median_mse = v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
    rows[g].reps = v.size();
  }
  return rows;
}

/// Exact ground truth once, then every (method, budget, repetition) cell as
/// an independent run seeded with seed_base + repetition.
inline BenchmarkResult run_benchmark(const BenchmarkPlan& plan) {
  plan.validate();
  BenchmarkResult result;
  result.truth = exact_shapley(*plan.game);

  struct Task {
    std::size_t method;
    std::size_t budget;
    std::size_t rep;
  };
  std::vector<Task> tasks;
  for (std::size_t m = 0; m < plan.methods.size(); ++m)
    for (std::size_t b = 0; b < plan.budgets.size(); ++b)
      for (std::size_t r = 0; r < plan.repetitions; ++r) tasks.push_back({m, b, r});

  result.records.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      try {
        const auto& task = tasks[t];
        const auto& spec = plan.methods[task.method];
        const std::size_t budget = plan.budgets[task.budget];
        const auto start = std::chrono::steady_clock::now();
        auto est = run_estimator(*plan.game, spec, budget, plan.seed_base + task.rep, plan.solver);
        const auto stop = std::chrono::steady_clock::now();
        auto& rec = result.records[t];
        rec.method = to_string(spec.method);
        rec.k = spec.k;
        rec.budget = budget;
        rec.repetition = task.rep;
        rec.mse = mse(est.values, result.truth);
        rec.evaluations = est.evaluations;
        rec.wall_ms = plan.record_time ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
        rec.underdetermined = est.underdetermined;
        rec.estimate = std::move(est.values);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = tasks.size();
      }
    }
  };
  const unsigned workers = std::min<unsigned>(plan.workers, static_cast<unsigned>(std::max<std::size_t>(tasks.size(), 1)));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  result.aggregates = aggregate(result.records);
  return result;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* kRecordHeader = "method,k,budget,repetition,mse,evaluations,wall_ms,flags";
inline constexpr const char* kAggregateHeader = "method,k,budget,mean_mse,stderr_mse,median_mse,reps";

inline void write_records_csv(const std::vector<BenchmarkRecord>& records, std::ostream& os) {
  os << kRecordHeader << '\n';
  for (const auto& r : records) {
    os << r.method << ',' << r.k << ',' << r.budget << ',' << r.repetition << ',' << detail::format_real(r.mse) << ','
       << r.evaluations << ',' << detail::format_real(r.wall_ms) << ',' << r.flags() << '\n';
  }
}

inline void write_aggregates_csv(const std::vector<AggregateRow>& rows, std::ostream& os) {
  os << kAggregateHeader << '\n';
  for (const auto& a : rows) {
    os << a.method << ',' << a.k << ',' << a.budget << ',' << detail::format_real(a.mean_mse) << ','
       << detail::format_real(a.stderr_mse) << ',' << detail::format_real(a.median_mse) << ',' << a.reps << '\n';
  }
}

/// Path of the aggregate file belonging to a records file: `x.csv` -> `x-agg.csv`.
inline std::string aggregate_path(const std::string& path) {
  const auto dot = path.rfind('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + "-agg.csv";
  return path.substr(0, dot) + "-agg.csv";
}

/// Writes the long-format records to `path` and aggregates next to it.
inline void emit_csv(const std::vector<BenchmarkRecord>& records, const std::string& path) {
  {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    write_records_csv(records, os);
  }
  std::ofstream os(aggregate_path(path));
  if (!os) throw std::runtime_error("cannot write " + aggregate_path(path));
  write_aggregates_csv(aggregate(records), os);
}

inline std::vector<BenchmarkRecord> read_records_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kRecordHeader) throw std::invalid_argument("records csv: bad header");
  std::vector<BenchmarkRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 8) throw std::invalid_argument("records csv: expected 8 fields");
    BenchmarkRecord r;
    r.method = f[0];
    r.k = std::stoi(f[1]);
    r.budget = std::stoull(f[2]);
    r.repetition = std::stoull(f[3]);
    r.mse = std::stod(f[4]);
    r.evaluations = std::stoull(f[5]);
    r.wall_ms = std::stod(f[6]);
    r.underdetermined = f[7] == "underdetermined";
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// SVG

inline constexpr double kPlotFloor = 1e-16;

/// Mean MSE against budget on a log scale, one polyline per (method, k).
inline std::string render_svg(const std::vector<AggregateRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("plot needs at least one curve");
  std::vector<std::string> labels;
  for (const auto& r : rows)
    if (std::find(labels.begin(), labels.end(), r.label()) == labels.end()) labels.push_back(r.label());

  auto ylog = [](double v) { return std::log10(std::max(v, kPlotFloor)); };
  double xmin = static_cast<double>(rows.front().budget), xmax = xmin;
  double ymin = ylog(rows.front().mean_mse), ymax = ymin;
  for (const auto& r : rows) {
    xmin = std::min(xmin, static_cast<double>(r.budget));
    xmax = std::max(xmax, static_cast<double>(r.budget));
    ymin = std::min(ymin, ylog(r.mean_mse));
    ymax = std::max(ymax, ylog(r.mean_mse));
  }
  ymin = std::floor(ymin);
  ymax = std::ceil(ymax);
  if (ymax <= ymin) ymax = ymin + 1;
  if (xmax <= xmin) {
    xmin -= 1;
    xmax += 1;
  }

  constexpr double width = 720, height = 480, left = 80, right = 200, top = 30, bottom = 60;
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double ly) { return top + (ymax - ly) / (ymax - ymin) * ph; };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  static constexpr const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(ymin); e <= static_cast<int>(ymax); ++e) {
    const double y = py(e);
    os << "<line x1=\"" << num(left) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left + pw) << "\" y2=\"" << num(y)
       << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << num(left - 8) << "\" y=\"" << num(y + 4)
       << "\" font-size=\"11\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  std::vector<std::size_t> ticks;
  for (const auto& r : rows)
    if (std::find(ticks.begin(), ticks.end(), r.budget) == ticks.end()) ticks.push_back(r.budget);
  std::sort(ticks.begin(), ticks.end());
  for (std::size_t t : ticks) {
    os << "<text x=\"" << num(px(static_cast<double>(t))) << "\" y=\"" << num(top + ph + 16)
       << "\" font-size=\"11\" text-anchor=\"middle\">" << t << "</text>\n";
  }
  os << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(height - 16)
     << "\" font-size=\"13\" text-anchor=\"middle\">budget T</text>\n";
  os << "<text x=\"18\" y=\"" << num(top + ph / 2) << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << num(top + ph / 2) << ")\">mean MSE</text>\n";

  for (std::size_t c = 0; c < labels.size(); ++c) {
    const char* color = palette[c % std::size(palette)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (const auto& r : rows) {
      if (r.label() != labels[c]) continue;
      os << (first ? "" : " ") << num(px(static_cast<double>(r.budget))) << ',' << num(py(ylog(r.mean_mse)));
      first = false;
    }
    os << "\"/>\n";
    const double ly = top + 14 + 18 * static_cast<double>(c);
    os << "<line x1=\"" << num(left + pw + 12) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(left + pw + 36)
       << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text class=\"legend\" x=\"" << num(left + pw + 42) << "\" y=\"" << num(ly + 4) << "\" font-size=\"12\">"
       << labels[c] << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

inline void emit_plot(const std::vector<AggregateRow>& rows, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << render_svg(rows);
}

}  // namespace kadd
