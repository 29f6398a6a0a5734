#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "kadd/coalition.hpp"
#include "kadd/exact.hpp"
#include "kadd/game.hpp"
#include "kadd/transform.hpp"
#include "kadd/wls.hpp"

namespace kadd {

/// Normalized probability mass of each coalition size under p_A ∝ w*_A.
/// Entry a holds C(n,a)·w*_a / Σ; entries 0 and n are zero.
inline std::vector<double> initial_distribution(int n) {
  if (n < 2) throw std::invalid_argument("sampling distribution needs at least two players");
  std::vector<double> mass(static_cast<std::size_t>(n + 1), 0.0);
  double total = 0.0;
  for (int a = 1; a < n; ++a) {
    mass[static_cast<std::size_t>(a)] = static_cast<double>(binomial(n, a)) * shapley_kernel_weight(n, a);
    total += mass[static_cast<std::size_t>(a)];
  }
  for (double& m : mass) m /= total;
  return mass;
}

/// Uniformly random coalition of exactly `size` players out of n.
template <class Rng>
Coalition random_coalition_of_size(int n, int size, Rng& rng) {
  // Floyd's algorithm
  Coalition a;
  for (int j = n - size; j < n; ++j) {
    const int t = std::uniform_int_distribution<int>(0, j)(rng);
    a = a.contains(t) ? a.with(j) : a.with(t);
  }
  return a;
}

class SamplerExhausted : public std::runtime_error {
 public:
  SamplerExhausted() : std::runtime_error("no undrawn proper coalition remains") {}
};

/// Without-replacement sampler over proper coalitions with p_A ∝ w*_{|A|}.
///
/// Sizes are drawn proportional to (undrawn count)·w*_a, then a member is
/// drawn uniformly among the undrawn coalitions of that size. This equals
/// drawing from the per-coalition distribution and renormalizing after each
/// removal.
class CoalitionSampler {
 public:
  CoalitionSampler(int n, std::uint64_t seed) : n_(n), rng_(seed) {
    if (n < 2) throw std::invalid_argument("sampler needs at least two players");
    strata_.resize(static_cast<std::size_t>(n + 1));
    for (int a = 1; a < n; ++a) {
      auto& s = strata_[static_cast<std::size_t>(a)];
      s.total = binomial(n, a);
      s.weight = shapley_kernel_weight(n, a);
    }
  }

  int players() const { return n_; }

  /// Remaining (unnormalized) mass of size stratum a.
  double remaining_mass(int a) const {
    const auto& s = strata_[static_cast<std::size_t>(a)];
    return static_cast<double>(s.total - s.drawn.size()) * s.weight;
  }

  std::size_t remaining() const {
    std::size_t r = 0;
    for (const auto& s : strata_) r += s.total - s.drawn.size();
    return r;
  }

  /// Marks a coalition as drawn without sampling it.
  void exclude(Coalition a) {
    const int size = a.size();
    if (size == 0 || size == n_) return;
    strata_[static_cast<std::size_t>(size)].mark(a);
  }

  Coalition draw() {
    double total = 0.0;
    for (int a = 1; a < n_; ++a) total += remaining_mass(a);
    if (remaining() == 0) throw SamplerExhausted();

    double u = std::uniform_real_distribution<double>(0.0, total)(rng_);
    int size = 0;
    for (int a = 1; a < n_; ++a) {
      const double m = remaining_mass(a);
      if (m <= 0.0) continue;
      size = a;
      if (u < m) break;
      u -= m;
    }
    auto& s = strata_[static_cast<std::size_t>(size)];

    Coalition pick;
    if (2 * s.drawn.size() <= s.total) {
      do {
        pick = random_coalition_of_size(n_, size, rng_);
      } while (s.drawn.contains(pick));
    } else {
      // more than half drawn: choose directly among the undrawn members
      std::vector<Coalition> open;
      open.reserve(s.total - s.drawn.size());
      for (Coalition c : enumerate_size(n_, size))
        if (!s.drawn.contains(c)) open.push_back(c);
      pick = open[std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng_)];
    }
    s.mark(pick);
    return pick;
  }

 private:
  struct Stratum {
    std::uint64_t total = 0;
    double weight = 0.0;
    std::unordered_set<Coalition, CoalitionHash> drawn;
    void mark(Coalition a) { drawn.insert(a); }
  };

  int n_;
  std::mt19937_64 rng_;
  std::vector<Stratum> strata_;
};

struct EstimatorConfig {
  int k = 2;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  SolverOptions solver;
  bool return_interactions = false;
};

/// Result of one estimator run.
struct Estimate {
  ShapleyVector values;
  /// Distinct coalitions this run evaluated.
  std::size_t evaluations = 0;
  bool underdetermined = false;
  std::optional<InteractionVector> interactions;
};

/// Fits a k-additive surrogate to T distinct sampled coalitions and returns
/// its singleton interactions as Shapley estimates.
inline Estimate run_svakadd(const Game& game, const EstimatorConfig& cfg) {
  const int n = game.players();
  if (cfg.k < 1 || cfg.k > n) throw std::invalid_argument("additivity degree must lie in [1, n]");
  const std::size_t total = std::size_t{1} << n;
  if (cfg.budget < 2 || cfg.budget > total) throw std::invalid_argument("budget must lie in [2, 2^n]");
  cfg.solver.validate();

  EvalSession session(game);
  SampleSet samples{n, {}, {}};
  auto take = [&](Coalition a) {
    samples.coalitions.push_back(a);
    samples.values.push_back(session(a));
  };
  take(Coalition{});
  take(grand_coalition(n));

  if (n >= 2) {
    CoalitionSampler sampler(n, cfg.seed);
    while (samples.size() < cfg.budget) take(sampler.draw());
  }

  auto basis = std::make_shared<const InteractionBasis>(n, cfg.k);
  const auto problem = build_problem(samples, basis, cfg.solver);
  auto sol = solve(problem, cfg.solver);

  Estimate est;
  est.values = sol.interactions.shapley();
  est.evaluations = session.evaluations();
  est.underdetermined = sol.underdetermined || samples.size() < min_budget(*basis);
  if (cfg.return_interactions) est.interactions = std::move(sol.interactions);
  return est;
}

}  // namespace kadd
