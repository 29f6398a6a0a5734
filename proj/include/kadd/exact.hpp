#pragma once

#include <cmath>
#include <iostream>
#include <stdexcept>
#include <vector>

#include "kadd/coalition.hpp"
#include "kadd/game.hpp"

namespace kadd {

using ShapleyVector = std::vector<double>;

namespace detail {
inline void check_exact_size(int n, bool allow_large) {
  if (n > kDefaultPlayerCap && !allow_large)
    throw std::invalid_argument("exact computation above " + std::to_string(kDefaultPlayerCap) +
                                " players requires an override");
  if (n > kExactWarnPlayers)
    std::clog << "warning: exact computation over 2^" << n << " coalitions\n";
}
}  // namespace detail

/// Exact Shapley values from one sweep over all 2^n coalitions.
///
/// Each ν(A) is scattered into every φ_i: members receive +c(|A|-1)·ν(A),
/// non-members −c(|A|)·ν(A), where c(s) = s!(n-s-1)!/n! = 1/(n·C(n-1,s)).
inline ShapleyVector exact_shapley(const Game& game, bool allow_large = false) {
  const int n = game.players();
  detail::check_exact_size(n, allow_large);
  std::vector<double> coef(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) coef[static_cast<std::size_t>(s)] = 1.0 / (n * static_cast<double>(binomial(n - 1, s)));

  ShapleyVector phi(static_cast<std::size_t>(n), 0.0);
  for (Coalition a : enumerate_all(n)) {
    const double v = game(a);
    const int s = a.size();
    const double plus = s > 0 ? coef[static_cast<std::size_t>(s - 1)] * v : 0.0;
    const double minus = s < n ? coef[static_cast<std::size_t>(s)] * v : 0.0;
    for (int i = 0; i < n; ++i) phi[static_cast<std::size_t>(i)] += a.contains(i) ? plus : -minus;
  }
  return phi;
}

namespace detail {
// Shapley interaction weighting for any S, including S = ∅.
inline double interaction_sum(const Game& game, Coalition s) {
  const int n = game.players();
  const int ss = s.size();
  const std::uint64_t rest = grand_coalition(n).bits & ~s.bits;
  // (n-a-s)! a! / (n-s+1)! = 1 / ((n-s+1) C(n-s, a))
  std::vector<double> w(static_cast<std::size_t>(n - ss + 1));
  for (int a = 0; a <= n - ss; ++a)
    w[static_cast<std::size_t>(a)] = 1.0 / ((n - ss + 1) * static_cast<double>(binomial(n - ss, a)));

  double total = 0.0;
  // A runs over subsets of N∖S, L over subsets of S
  std::uint64_t a = 0;
  while (true) {
    double diff = 0.0;
    std::uint64_t l = 0;
    while (true) {
      const double sign = ((ss - std::popcount(l)) % 2 == 0) ? 1.0 : -1.0;
      diff += sign * game(Coalition{a | l});
      if (l == s.bits) break;
      l = (l - s.bits) & s.bits;
    }
    total += w[static_cast<std::size_t>(std::popcount(a))] * diff;
    if (a == rest) break;
    a = (a - rest) & rest;
  }
  return total;
}
}  // namespace detail

/// Shapley interaction index
/// I(S) = Σ_{A⊆N∖S} (n-|A|-|S|)!|A|!/(n-|S|+1)! · Σ_{L⊆S} (-1)^{|S|-|L|} ν(A∪L).
inline double exact_interaction(const Game& game, Coalition s, bool allow_large = false) {
  if (s.empty()) throw std::invalid_argument("interaction index needs a nonempty coalition");
  if (!valid_for(s, game.players())) throw std::invalid_argument("interaction coalition outside player set");
  detail::check_exact_size(game.players(), allow_large);
  return detail::interaction_sum(game, s);
}

/// Interaction indices of every coalition, indexed by bit pattern. Entry 0
/// is the same weighting applied to S = ∅ (the constant term I_0).
inline std::vector<double> exact_interactions_all(const Game& game) {
  const int n = game.players();
  detail::check_exact_size(n, false);
  std::vector<double> out(std::size_t{1} << n, 0.0);
  for (Coalition s : enumerate_all(n)) out[s.bits] = detail::interaction_sum(game, s);
  return out;
}

/// (1/n) Σ_i (estimate_i − truth_i)²
inline double mse(const ShapleyVector& estimate, const ShapleyVector& truth) {
  if (estimate.size() != truth.size()) throw std::invalid_argument("mse: length mismatch");
  if (truth.empty()) throw std::invalid_argument("mse: empty vectors");
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) s += (estimate[i] - truth[i]) * (estimate[i] - truth[i]);
  return s / static_cast<double>(truth.size());
}

}  // namespace kadd
