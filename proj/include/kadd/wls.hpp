#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kadd/coalition.hpp"
#include "kadd/transform.hpp"

namespace kadd {

enum class ConstraintMode {
  /// ∅ and N enter the objective with a large weight.
  penalty,
  /// ∅ and N leave the objective; ν_k(∅) = ν(∅) and the efficiency equation
  /// are imposed exactly.
  eliminate,
};

inline std::string to_string(ConstraintMode m) { return m == ConstraintMode::penalty ? "penalty" : "eliminate"; }

inline ConstraintMode parse_constraint_mode(const std::string& s) {
  if (s == "penalty") return ConstraintMode::penalty;
  if (s == "eliminate") return ConstraintMode::eliminate;
  throw std::invalid_argument("unknown constraint mode '" + s + "'");
}

struct SolverOptions {
  ConstraintMode constraint_mode = ConstraintMode::penalty;
  double penalty_weight = 1e6;
  /// Relative pivot threshold below which the fit is treated as rank deficient.
  double rank_tolerance = 1e-10;
  /// Ridge term added to the objective; zero disables it.
  double regularization = 0.0;

  void validate() const {
    if (!(penalty_weight > 0.0)) throw std::invalid_argument("penalty weight must be positive");
    if (!(rank_tolerance >= 0.0)) throw std::invalid_argument("rank tolerance must be nonnegative");
    if (!(regularization >= 0.0)) throw std::invalid_argument("regularization must be nonnegative");
  }
};

/// Distinct evaluated coalitions and their values, in evaluation order.
struct SampleSet {
  int n = 0;
  std::vector<Coalition> coalitions;
  std::vector<double> values;

  bool contains(Coalition a) const {
    for (Coalition c : coalitions)
      if (c == a) return true;
    return false;
  }
  bool contains_empty_and_grand() const { return contains(Coalition{}) && contains(grand_coalition(n)); }
  std::size_t size() const { return coalitions.size(); }
};

/// w*_a = 1 / C(n-2, a-1) for proper coalition sizes 1 <= a <= n-1.
inline double shapley_kernel_weight(int n, int a) {
  if (n < 2) throw std::invalid_argument("kernel weights need at least two players");
  if (a < 1 || a > n - 1) throw std::invalid_argument("kernel weight defined only for proper coalition sizes");
  return 1.0 / static_cast<double>(binomial(n - 2, a - 1));
}

/// Weighted least-squares fit of interactions to sampled values.
struct WlsProblem {
  std::shared_ptr<const InteractionBasis> basis;
  /// Row for coalition A, column for B: γ^{|B|}_{|A∩B|}.
  Eigen::MatrixXd design;
  Eigen::VectorXd weights;
  Eigen::VectorXd targets;
  /// Exact linear constraints (eliminate mode only).
  Eigen::MatrixXd constraints;
  Eigen::VectorXd constraint_rhs;
};

struct WlsSolution {
  InteractionVector interactions;
  /// True when the weighted design did not have full column rank and a
  /// minimum-norm solution was returned.
  bool underdetermined = false;
  Eigen::Index rank = 0;
};

/// One design row: γ^{|B|}_{|A∩B|} for every B in the basis.
inline Eigen::RowVectorXd design_row(const InteractionBasis& basis, Coalition a) {
  const auto& g = basis.gamma();
  Eigen::RowVectorXd row(static_cast<Eigen::Index>(basis.dimension()));
  for (std::size_t j = 0; j < basis.dimension(); ++j) {
    const Coalition b = basis.subset(j);
    row(static_cast<Eigen::Index>(j)) = g((a & b).size(), b.size());
  }
  return row;
}

/// Builds the fit with caller-supplied weights for the proper coalitions.
/// `proper_weight(i)` is queried for sample i when it is neither ∅ nor N.
template <class WeightFn>
WlsProblem build_problem(const SampleSet& samples, std::shared_ptr<const InteractionBasis> basis,
                         const SolverOptions& opts, WeightFn&& proper_weight) {
  opts.validate();
  const int n = samples.n;
  if (basis->players() != n) throw std::invalid_argument("basis and samples disagree on the player count");
  if (samples.values.size() != samples.coalitions.size()) throw std::invalid_argument("sample values misaligned");
  if (samples.size() < 2) throw std::invalid_argument("least-squares fit needs at least two samples");
  if (!samples.contains_empty_and_grand())
    throw std::invalid_argument("sample set must contain the empty and the grand coalition");
  for (double v : samples.values)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite sampled value");

  const Coalition grand = grand_coalition(n);
  const bool penalty = opts.constraint_mode == ConstraintMode::penalty;
  std::vector<std::size_t> rows;
  double v_empty = 0.0;
  double v_grand = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Coalition a = samples.coalitions[i];
    if (a.empty()) v_empty = samples.values[i];
    if (a == grand) v_grand = samples.values[i];
    if (penalty || (!a.empty() && a != grand)) rows.push_back(i);
  }

  const auto d = static_cast<Eigen::Index>(basis->dimension());
  WlsProblem p;
  p.design.resize(static_cast<Eigen::Index>(rows.size()), d);
  p.weights.resize(static_cast<Eigen::Index>(rows.size()));
  p.targets.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t i = rows[r];
    const Coalition a = samples.coalitions[i];
    const auto er = static_cast<Eigen::Index>(r);
    p.design.row(er) = design_row(*basis, a);
    p.targets(er) = samples.values[i];
    p.weights(er) = (a.empty() || a == grand) ? opts.penalty_weight : proper_weight(i);
    if (!(p.weights(er) > 0.0)) throw std::invalid_argument("least-squares weights must be positive");
  }

  if (!penalty) {
    p.constraints.resize(2, d);
    const auto eff = efficiency_row(*basis);
    for (Eigen::Index j = 0; j < d; ++j) p.constraints(0, j) = eff[static_cast<std::size_t>(j)];
    p.constraints.row(1) = design_row(*basis, Coalition{});
    p.constraint_rhs.resize(2);
    p.constraint_rhs << v_grand - v_empty, v_empty;
  }
  p.basis = std::move(basis);
  return p;
}

/// Builds the fit with the Shapley kernel weights w*_{|A|}.
inline WlsProblem build_problem(const SampleSet& samples, std::shared_ptr<const InteractionBasis> basis,
                                const SolverOptions& opts) {
  const int n = samples.n;
  return build_problem(samples, std::move(basis), opts, [&](std::size_t i) {
    return shapley_kernel_weight(n, samples.coalitions[i].size());
  });
}

/// Minimizes Σ w_A (ν(A) − (P I)_A)² subject to the problem's constraints.
///
/// The weighted system is solved by a complete orthogonal decomposition,
/// which yields the minimum-norm minimizer when the design is rank deficient.
/// Constraints are removed by parametrizing I = I_p + Z z with Z spanning the
/// null space of the constraint matrix.
inline WlsSolution solve(const WlsProblem& problem, const SolverOptions& opts) {
  opts.validate();
  const Eigen::Index d = problem.design.cols();
  if (!problem.design.allFinite() || !problem.targets.allFinite() || !problem.weights.allFinite())
    throw std::invalid_argument("least-squares inputs must be finite");

  const Eigen::VectorXd sw = problem.weights.cwiseSqrt();
  Eigen::MatrixXd a = sw.asDiagonal() * problem.design;
  Eigen::VectorXd b = sw.cwiseProduct(problem.targets);

  Eigen::VectorXd particular = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd basis_z = Eigen::MatrixXd::Identity(d, d);
  if (problem.constraints.rows() > 0) {
    if (!problem.constraints.allFinite() || !problem.constraint_rhs.allFinite())
      throw std::invalid_argument("constraint inputs must be finite");
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> ccod(problem.constraints);
    particular = ccod.solve(problem.constraint_rhs);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(problem.constraints.transpose());
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
    basis_z = q.rightCols(d - ccod.rank());
    b -= a * particular;
    a = a * basis_z;
  }

  if (opts.regularization > 0.0) {
    // λ‖I‖² with I = I_p + Z z
    const Eigen::Index m = a.rows();
    const double root = std::sqrt(opts.regularization);
    a.conservativeResize(m + d, Eigen::NoChange);
    a.bottomRows(d) = root * basis_z;
    b.conservativeResize(m + d);
    b.tail(d) = -root * particular;
  }

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(opts.rank_tolerance);
  cod.compute(a);
  const Eigen::VectorXd z = a.cols() > 0 ? Eigen::VectorXd(cod.solve(b)) : Eigen::VectorXd();
  const Eigen::VectorXd x = particular + basis_z * z;

  WlsSolution sol;
  sol.rank = a.cols() > 0 ? cod.rank() : 0;
  sol.underdetermined = sol.rank < a.cols();
  sol.interactions.basis = problem.basis;
  sol.interactions.coeffs.assign(x.data(), x.data() + x.size());
  return sol;
}

/// Smallest budget for which the fit can have a unique solution: the basis
/// dimension.
inline std::size_t min_budget(const InteractionBasis& basis) { return basis.dimension(); }

}  // namespace kadd
