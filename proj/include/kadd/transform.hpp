#pragma once

#include <bit>
#include <cstdint>
#include <memory>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "kadd/coalition.hpp"
#include "kadd/game.hpp"

namespace kadd {

using Rational = boost::multiprecision::cpp_rational;

inline constexpr int kMaxBernoulli = 64;

/// Bernoulli numbers η_0..η_64 with η_1 = -1/2, from the recurrence
/// η_r = -Σ_{l<r} η_l / (r-l+1) · C(r,l).
inline const std::vector<Rational>& bernoulli_table() {
  static const std::vector<Rational> table = [] {
    std::vector<Rational> eta(kMaxBernoulli + 1);
    eta[0] = 1;
    for (int r = 1; r <= kMaxBernoulli; ++r) {
      Rational acc = 0;
      for (int l = 0; l < r; ++l) acc += eta[static_cast<std::size_t>(l)] * Rational(binomial(r, l)) / (r - l + 1);
      eta[static_cast<std::size_t>(r)] = -acc;
    }
    return eta;
  }();
  return table;
}

inline const Rational& bernoulli_exact(int r) {
  if (r < 0 || r > kMaxBernoulli) throw std::out_of_range("Bernoulli index outside [0, 64]");
  return bernoulli_table()[static_cast<std::size_t>(r)];
}

inline double bernoulli_eta(int r) { return static_cast<double>(bernoulli_exact(r)); }

/// γ_r^s = Σ_{l=0..r} C(r,l) η_{s-l}, for 0 <= r <= s.
inline Rational gamma_exact(int r, int s) {
  if (r < 0 || r > s || s > kMaxBernoulli) throw std::invalid_argument("gamma coefficient needs 0 <= r <= s <= 64");
  Rational g = 0;
  for (int l = 0; l <= r; ++l) g += Rational(binomial(r, l)) * bernoulli_exact(s - l);
  return g;
}

inline double gamma_coeff(int r, int s) { return static_cast<double>(gamma_exact(r, s)); }

/// Dense (n+1)x(n+1) table of γ values; entry (s, r) = γ_r^s, zero for r > s.
class GammaTable {
 public:
  explicit GammaTable(int n) : n_(n), data_(static_cast<std::size_t>((n + 1) * (n + 1)), 0.0) {
    for (int s = 0; s <= n; ++s)
      for (int r = 0; r <= s; ++r) data_[index(r, s)] = gamma_coeff(r, s);
  }

  /// γ^{|B|}_{|A∩B|}
  double operator()(int intersection, int subset_size) const { return data_[index(intersection, subset_size)]; }
  int players() const { return n_; }

 private:
  std::size_t index(int r, int s) const { return static_cast<std::size_t>(s * (n_ + 1) + r); }
  int n_;
  std::vector<double> data_;
};

/// All coalitions B with |B| <= k in size-major lexicographic order:
/// ∅, {1}, ..., {n}, {1,2}, {1,3}, ..., {n-1,n}, ...
class InteractionBasis {
 public:
  InteractionBasis(int n, int k) : n_(n), k_(k), gamma_(n) {
    check_players(n);
    if (k < 0 || k > n) throw std::invalid_argument("additivity degree must lie in [0, n]");
    for (int s = 0; s <= k; ++s) {
      std::vector<int> idx(static_cast<std::size_t>(s));
      for (int j = 0; j < s; ++j) idx[static_cast<std::size_t>(j)] = j;
      while (true) {
        Coalition b;
        for (int j : idx) b = b.with(j);
        position_.emplace(b, subsets_.size());
        subsets_.push_back(b);
        // next combination in lexicographic order
        int j = s - 1;
        while (j >= 0 && idx[static_cast<std::size_t>(j)] == n - s + j) --j;
        if (j < 0) break;
        ++idx[static_cast<std::size_t>(j)];
        for (int t = j + 1; t < s; ++t) idx[static_cast<std::size_t>(t)] = idx[static_cast<std::size_t>(t - 1)] + 1;
      }
    }
  }

  int players() const { return n_; }
  int degree() const { return k_; }
  std::size_t dimension() const { return subsets_.size(); }
  const std::vector<Coalition>& subsets() const { return subsets_; }
  Coalition subset(std::size_t i) const { return subsets_[i]; }
  const GammaTable& gamma() const { return gamma_; }

  /// Index of B in the basis, or npos when |B| > k.
  std::size_t position(Coalition b) const {
    auto it = position_.find(b);
    return it == position_.end() ? npos : it->second;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  int n_;
  int k_;
  GammaTable gamma_;
  std::vector<Coalition> subsets_;
  std::unordered_map<Coalition, std::size_t, CoalitionHash> position_;
};

/// Σ_{j=0..k} C(n,j)
inline std::size_t basis_dimension(int n, int k) {
  std::size_t d = 0;
  for (int j = 0; j <= k; ++j) d += binomial(n, j);
  return d;
}

/// Interaction coefficients I^k(B) aligned with a basis.
struct InteractionVector {
  std::shared_ptr<const InteractionBasis> basis;
  std::vector<double> coeffs;

  /// Singleton slice in player order: the Shapley values of the surrogate.
  std::vector<double> shapley() const {
    const int n = basis->players();
    return {coeffs.begin() + 1, coeffs.begin() + 1 + n};
  }

  double at(Coalition b) const {
    const auto p = basis->position(b);
    return p == InteractionBasis::npos ? 0.0 : coeffs[p];
  }
};

/// ν_k(A) = Σ_{|B|<=k} γ^{|B|}_{|A∩B|} I^k(B)
inline double kadd_eval(const InteractionVector& iv, Coalition a) {
  const auto& basis = *iv.basis;
  const auto& g = basis.gamma();
  double v = 0.0;
  for (std::size_t j = 0; j < basis.dimension(); ++j) {
    const Coalition b = basis.subset(j);
    v += g((a & b).size(), b.size()) * iv.coeffs[j];
  }
  return v;
}

/// Rebuilds ν from interactions of all 2^n subsets (indexed by bit pattern).
inline ValueTable reconstruct_values(const std::vector<double>& interactions, int n) {
  check_players(n);
  const std::size_t total = std::size_t{1} << n;
  if (interactions.size() != total) throw std::invalid_argument("reconstruct_values needs all 2^n interactions");
  const GammaTable g(n);
  ValueTable t{n, std::vector<double>(total, 0.0)};
  for (std::uint64_t a = 0; a < total; ++a) {
    double v = 0.0;
    for (std::uint64_t b = 0; b < total; ++b)
      v += g(std::popcount(a & b), std::popcount(b)) * interactions[b];
    t.values[a] = v;
  }
  return t;
}

/// Coefficients of the efficiency constraint: γ^{|B|}_{|B|} − γ^{|B|}_0.
inline std::vector<double> efficiency_row(const InteractionBasis& basis) {
  std::vector<double> row;
  row.reserve(basis.dimension());
  for (Coalition b : basis.subsets()) {
    const int s = b.size();
    row.push_back(static_cast<double>(gamma_exact(s, s) - gamma_exact(0, s)));
  }
  return row;
}

/// Game whose value is ν_k of a fixed interaction vector.
class KAdditiveGame final : public Game {
 public:
  explicit KAdditiveGame(InteractionVector iv) : Game(iv.basis->players()), iv_(std::move(iv)) {}
  const InteractionVector& interactions() const { return iv_; }
  std::string describe() const override { return "kadditive"; }

 protected:
  double compute(Coalition a) const override { return kadd_eval(iv_, a); }

 private:
  InteractionVector iv_;
};

/// Random k-additive game: interaction coefficients uniform in [-1, 1].
inline std::shared_ptr<const KAdditiveGame> random_kadditive_game(int n, int k, std::uint64_t seed) {
  auto basis = std::make_shared<const InteractionBasis>(n, k);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  InteractionVector iv{basis, std::vector<double>(basis->dimension())};
  for (double& c : iv.coeffs) c = dist(rng);
  return std::make_shared<KAdditiveGame>(std::move(iv));
}

/// CSV lines `<players joined by commas | empty>,<value>` in basis order.
inline void write_interactions_csv(const InteractionVector& iv, std::ostream& os) {
  for (std::size_t j = 0; j < iv.basis->dimension(); ++j) {
    const auto m = members(iv.basis->subset(j));
    if (m.empty()) {
      os << "empty";
    } else {
      for (std::size_t t = 0; t < m.size(); ++t) os << (t ? "," : "") << m[t];
    }
    os << ',' << detail::format_real(iv.coeffs[j]) << '\n';
  }
}

}  // namespace kadd
