#pragma once

#include <cmath>
#include <fstream>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kadd/coalition.hpp"

namespace kadd {

/// Raised when a value function cannot produce a value (oracle protocol
/// failures, broken pipes). Distinct from input validation errors.
class GameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A cooperative game over players 1..n.
///
/// Values are cached per coalition; `evaluations()` counts distinct
/// coalitions whose value was computed. The cache is internally synchronized
/// so one game may be shared by concurrent estimator runs.
class Game {
 public:
  explicit Game(int n, bool allow_large = false) : n_(n) { check_players(n, allow_large); }
  virtual ~Game() = default;

  Game(const Game&) = delete;
  Game& operator=(const Game&) = delete;

  int players() const { return n_; }

  double operator()(Coalition a) const {
    if (!valid_for(a, n_)) throw std::out_of_range("coalition has bits beyond the player count");
    {
      std::lock_guard lock(mutex_);
      if (auto it = cache_.find(a); it != cache_.end()) return it->second;
    }
    const double v = compute(a);
    std::lock_guard lock(mutex_);
    auto [it, inserted] = cache_.try_emplace(a, v);
    return it->second;
  }

  std::size_t evaluations() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
  }

  virtual std::string describe() const = 0;

 protected:
  /// Uncached value. Must be deterministic.
  virtual double compute(Coalition a) const = 0;

 private:
  int n_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<Coalition, double, CoalitionHash> cache_;
};

using GamePtr = std::shared_ptr<const Game>;

/// Per-run view of a game that counts the distinct coalitions one estimator
/// run touches. This is the budget an estimator reports, independent of what
/// other runs sharing the game have already cached.
class EvalSession {
 public:
  explicit EvalSession(const Game& game) : game_(&game) {}

  int players() const { return game_->players(); }

  double operator()(Coalition a) {
    if (auto it = seen_.find(a); it != seen_.end()) return it->second;
    const double v = (*game_)(a);
    seen_.emplace(a, v);
    return v;
  }

  bool seen(Coalition a) const { return seen_.contains(a); }
  std::size_t evaluations() const { return seen_.size(); }

 private:
  const Game* game_;
  std::unordered_map<Coalition, double, CoalitionHash> seen_;
};

// ---------------------------------------------------------------------------
// Synthetic games

class AdditiveGame final : public Game {
 public:
  explicit AdditiveGame(std::vector<double> weights)
      : Game(static_cast<int>(weights.size())), weights_(std::move(weights)) {}

  const std::vector<double>& weights() const { return weights_; }
  std::string describe() const override { return "additive"; }

 protected:
  double compute(Coalition a) const override {
    double s = 0.0;
    for (int i = 0; i < players(); ++i)
      if (a.contains(i)) s += weights_[static_cast<std::size_t>(i)];
    return s;
  }

 private:
  std::vector<double> weights_;
};

class UnanimityGame final : public Game {
 public:
  UnanimityGame(int n, Coalition carrier) : Game(n), carrier_(carrier) {
    if (carrier.empty()) throw std::invalid_argument("unanimity game needs a nonempty carrier");
    if (!valid_for(carrier, n)) throw std::invalid_argument("unanimity carrier outside player set");
  }
  std::string describe() const override { return "unanimity"; }

 protected:
  double compute(Coalition a) const override { return carrier_.subset_of(a) ? 1.0 : 0.0; }

 private:
  Coalition carrier_;
};

class GloveGame final : public Game {
 public:
  GloveGame(int n, Coalition left) : Game(n), left_(left) {
    if (left.empty() || left == grand_coalition(n) || !valid_for(left, n))
      throw std::invalid_argument("glove game needs a proper nonempty left-hand set");
  }
  std::string describe() const override { return "glove"; }

 protected:
  double compute(Coalition a) const override {
    const int l = (a & left_).size();
    const int r = a.size() - l;
    return static_cast<double>(std::min(l, r));
  }

 private:
  Coalition left_;
};

inline GamePtr make_additive(std::vector<double> weights) {
  if (weights.empty()) throw std::invalid_argument("additive game needs at least one weight");
  return std::make_shared<AdditiveGame>(std::move(weights));
}
inline GamePtr make_unanimity(int n, Coalition carrier) {
  return std::make_shared<UnanimityGame>(n, carrier);
}
inline GamePtr make_glove(int n, Coalition left) { return std::make_shared<GloveGame>(n, left); }

// ---------------------------------------------------------------------------
// Dense value tables

/// ν stored densely, indexed by coalition bit pattern.
struct ValueTable {
  int n = 0;
  std::vector<double> values;

  double operator[](Coalition a) const { return values[static_cast<std::size_t>(a.bits)]; }
};

class TableGame final : public Game {
 public:
  explicit TableGame(ValueTable table) : Game(table.n), table_(std::move(table)) {
    if (table_.values.size() != (std::size_t{1} << table_.n))
      throw std::invalid_argument("value table length must be 2^n");
    for (double v : table_.values)
      if (!std::isfinite(v)) throw std::invalid_argument("value table holds a non-finite value");
  }

  const ValueTable& table() const { return table_; }
  std::string describe() const override { return "table"; }

 protected:
  double compute(Coalition a) const override { return table_[a]; }

 private:
  ValueTable table_;
};

inline GamePtr make_table_game(ValueTable table) { return std::make_shared<TableGame>(std::move(table)); }

/// Evaluates every coalition of `game` into a dense table.
inline ValueTable tabulate(const Game& game) {
  ValueTable t{game.players(), {}};
  t.values.reserve(std::size_t{1} << t.n);
  for (Coalition a : enumerate_all(t.n)) t.values.push_back(game(a));
  return t;
}

/// Uniform values in [lo, hi] for every coalition.
inline ValueTable random_table(int n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  check_players(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  ValueTable t{n, std::vector<double>(std::size_t{1} << n)};
  for (double& v : t.values) v = dist(rng);
  return t;
}

namespace detail {
inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

inline void save_value_table(const ValueTable& t, std::ostream& os) {
  os << "n=" << t.n << '\n';
  for (Coalition a : enumerate_all(t.n)) os << to_bitstring(a, t.n) << ',' << detail::format_real(t[a]) << '\n';
}

inline void save_value_table(const ValueTable& t, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  save_value_table(t, os);
  if (!os) throw std::runtime_error("write failed: " + path);
}

/// Parses the value-table text format: `n=<int>` then one `<bitstring>,<real>`
/// line per coalition in any order; `#` lines are comments.
inline ValueTable read_value_table(std::istream& is) {
  std::string line;
  int n = -1;
  std::vector<double> values;
  std::vector<char> present;
  std::size_t filled = 0;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("value table line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (n < 0) {
      if (line.rfind("n=", 0) != 0) fail("expected header n=<int>");
      try {
        std::size_t pos = 0;
        n = std::stoi(line.substr(2), &pos);
        if (pos != line.size() - 2) fail("bad header");
      } catch (const std::logic_error&) {
        fail("bad header");
      }
      check_players(n);
      values.assign(std::size_t{1} << n, 0.0);
      present.assign(values.size(), 0);
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail("expected <bitstring>,<value>");
    const std::string bits = line.substr(0, comma);
    if (bits.size() != static_cast<std::size_t>(n)) fail("inconsistent bitstring length");
    Coalition a;
    try {
      a = parse_bitstring(bits);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
    double v = 0.0;
    try {
      std::size_t pos = 0;
      const std::string num = line.substr(comma + 1);
      v = std::stod(num, &pos);
      if (pos != num.size()) fail("trailing characters after value");
    } catch (const std::logic_error&) {
      fail("non-numeric value");
    }
    if (!std::isfinite(v)) fail("non-finite value");
    auto idx = static_cast<std::size_t>(a.bits);
    if (present[idx]) fail("duplicate coalition " + bits);
    present[idx] = 1;
    values[idx] = v;
    ++filled;
  }
  if (n < 0) throw std::invalid_argument("value table: missing header");
  if (filled != values.size()) throw std::invalid_argument("value table: incomplete table");
  return ValueTable{n, std::move(values)};
}

inline GamePtr load_value_table(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open value table " + path);
  return make_table_game(read_value_table(is));
}

// ---------------------------------------------------------------------------

/// ν'(A) = ν(A) - ν(∅).
class NormalizedGame final : public Game {
 public:
  explicit NormalizedGame(GamePtr inner) : Game(inner->players(), true), inner_(std::move(inner)) {}
  std::string describe() const override { return inner_->describe() + "(normalized)"; }
  const Game& inner() const { return *inner_; }

 protected:
  double compute(Coalition a) const override {
    if (a.empty()) return 0.0;
    return (*inner_)(a) - (*inner_)(Coalition{});
  }

 private:
  GamePtr inner_;
};

inline GamePtr normalize(GamePtr game) { return std::make_shared<NormalizedGame>(std::move(game)); }

}  // namespace kadd
