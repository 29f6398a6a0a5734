#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "kadd/coalition.hpp"
#include "kadd/game.hpp"
#include "kadd/svakadd.hpp"
#include "kadd/wls.hpp"

namespace kadd {

/// Monte Carlo over random player orderings. Each ordering is walked from ∅
/// to N; a walk that would need more distinct evaluations than the budget
/// allows is abandoned and contributes nothing.
inline Estimate permutation_sampling(const Game& game, std::size_t budget, std::uint64_t seed) {
  const int n = game.players();
  if (budget < static_cast<std::size_t>(n)) throw std::invalid_argument("permutation sampling needs a budget of at least n");
  std::mt19937_64 rng(seed);
  EvalSession session(game);
  std::vector<double> sum(static_cast<std::size_t>(n), 0.0);
  std::size_t walks = 0;
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> marginal(static_cast<std::size_t>(n));

  auto affordable = [&](Coalition a) { return session.seen(a) || session.evaluations() < budget; };

  while (session.evaluations() < budget) {
    std::shuffle(order.begin(), order.end(), rng);
    Coalition prefix;
    if (!affordable(prefix)) break;
    double prev = session(prefix);
    bool complete = true;
    for (int p : order) {
      const Coalition next = prefix.with(p);
      if (!affordable(next)) {
        complete = false;
        break;
      }
      const double v = session(next);
      marginal[static_cast<std::size_t>(p)] = v - prev;
      prev = v;
      prefix = next;
    }
    if (!complete) break;
    for (int i = 0; i < n; ++i) sum[static_cast<std::size_t>(i)] += marginal[static_cast<std::size_t>(i)];
    ++walks;
  }

  Estimate est;
  est.values.assign(static_cast<std::size_t>(n), 0.0);
  if (walks > 0)
    for (int i = 0; i < n; ++i) est.values[static_cast<std::size_t>(i)] = sum[static_cast<std::size_t>(i)] / walks;
  est.evaluations = session.evaluations();
  return est;
}

/// Stratification by player and coalition size. Strata (i, s) are visited
/// round-robin; each visit draws one not-yet-used A ⊆ N∖{i} with |A| = s and
/// records ν(A∪{i}) − ν(A). Sampling stops at the first draw whose new
/// evaluations no longer fit in the budget.
inline Estimate stratified_sampling(const Game& game, std::size_t budget, std::uint64_t seed) {
  const int n = game.players();
  if (budget < 2) throw std::invalid_argument("stratified sampling needs a budget of at least 2");
  std::mt19937_64 rng(seed);
  EvalSession session(game);

  struct Stratum {
    int player;
    int size;
    std::uint64_t capacity;
    std::unordered_set<Coalition, CoalitionHash> used;
    double sum = 0.0;
  };
  // sizes ordered from the extremes inwards: 0, n-1, 1, n-2, ...
  std::vector<int> size_order;
  for (int lo = 0, hi = n - 1; lo <= hi; ++lo, --hi) {
    size_order.push_back(lo);
    if (hi != lo) size_order.push_back(hi);
  }
  std::vector<Stratum> strata;
  for (int s : size_order)
    for (int i = 0; i < n; ++i) strata.push_back(Stratum{i, s, binomial(n - 1, s), {}, 0.0});

  auto draw_without = [&](int player, int size) {
    // uniform size-`size` subset of the other n-1 players, mapped around `player`
    const Coalition raw = random_coalition_of_size(n - 1, size, rng);
    const std::uint64_t low = raw.bits & ((std::uint64_t{1} << player) - 1);
    const std::uint64_t high = (raw.bits >> player) << (player + 1);
    return Coalition{low | high};
  };

  bool stop = false;
  while (!stop) {
    bool progressed = false;
    for (auto& st : strata) {
      if (st.used.size() >= st.capacity) continue;
      Coalition a;
      if (2 * st.used.size() <= st.capacity) {
        do {
          a = draw_without(st.player, st.size);
        } while (st.used.contains(a));
      } else {
        std::vector<Coalition> open;
        for (Coalition c : enumerate_size(n, st.size))
          if (!c.contains(st.player) && !st.used.contains(c)) open.push_back(c);
        a = open[std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng)];
      }
      const Coalition b = a.with(st.player);
      const std::size_t cost = (session.seen(a) ? 0 : 1) + (session.seen(b) ? 0 : 1);
      if (session.evaluations() + cost > budget) {
        stop = true;
        break;
      }
      st.used.insert(a);
      st.sum += session(b) - session(a);
      progressed = true;
    }
    if (!progressed) break;
  }

  Estimate est;
  est.values.assign(static_cast<std::size_t>(n), 0.0);
  for (const auto& st : strata)
    if (!st.used.empty())
      est.values[static_cast<std::size_t>(st.player)] += st.sum / static_cast<double>(st.used.size()) / n;
  est.evaluations = session.evaluations();
  return est;
}

/// Fits the 1-additive model to coalitions with per-coalition multiplicities.
/// ∅ and N are always included and the efficiency constraint is imposed
/// exactly, whatever the constraint mode in `opts`.
inline Estimate kernelshap_fit(const Game& game, const std::map<Coalition, double>& multiplicity,
                               SolverOptions opts) {
  opts.constraint_mode = ConstraintMode::eliminate;
  const int n = game.players();
  EvalSession session(game);
  SampleSet samples{n, {}, {}};
  std::vector<double> weight;
  auto take = [&](Coalition a, double w) {
    samples.coalitions.push_back(a);
    samples.values.push_back(session(a));
    weight.push_back(w);
  };
  take(Coalition{}, 1.0);
  take(grand_coalition(n), 1.0);
  for (const auto& [a, m] : multiplicity)
    if (!a.empty() && a != grand_coalition(n)) take(a, m);

  auto basis = std::make_shared<const InteractionBasis>(n, 1);
  const auto problem = build_problem(samples, basis, opts, [&](std::size_t i) { return weight[i]; });
  const auto sol = solve(problem, opts);
  Estimate est;
  est.values = sol.interactions.shapley();
  est.evaluations = session.evaluations();
  est.underdetermined = sol.underdetermined;
  return est;
}

enum class KernelShapSampling { with_replacement, without_replacement };

/// KernelSHAP: ∅ and N, then proper coalitions drawn with size probability
/// ∝ C(n,a)·w*_a and uniform members until T distinct coalitions are held.
/// With replacement, each distinct coalition is weighted by how often it was
/// drawn; without replacement, by w*_{|A|}.
inline Estimate kernelshap(const Game& game, std::size_t budget, std::uint64_t seed, const SolverOptions& opts,
                           KernelShapSampling sampling = KernelShapSampling::with_replacement) {
  const int n = game.players();
  if (n < 2) throw std::invalid_argument("kernelshap needs at least two players");
  const std::size_t total = std::size_t{1} << n;
  if (budget < static_cast<std::size_t>(n) + 3 && budget < total)
    throw std::invalid_argument("kernelshap needs a budget of at least n+3");
  if (budget > total) throw std::invalid_argument("budget exceeds 2^n");

  std::map<Coalition, double> multiplicity;
  if (sampling == KernelShapSampling::without_replacement) {
    CoalitionSampler sampler(n, seed);
    while (multiplicity.size() + 2 < budget) {
      const Coalition a = sampler.draw();
      multiplicity[a] = shapley_kernel_weight(n, a.size());
    }
    return kernelshap_fit(game, multiplicity, opts);
  }

  std::mt19937_64 rng(seed);
  const auto mass = initial_distribution(n);
  std::discrete_distribution<int> size_dist(mass.begin(), mass.end());
  while (multiplicity.size() + 2 < budget) {
    const int size = size_dist(rng);
    multiplicity[random_coalition_of_size(n, size, rng)] += 1.0;
  }
  return kernelshap_fit(game, multiplicity, opts);
}

}  // namespace kadd
