#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stkrr/error.hpp"
#include "stkrr/kernel.hpp"

namespace stkrr {

/// Descending, nonnegative eigenvalues mu_1 >= ... >= mu_n >= 0.
///
/// Truncation levels r are counts in [1, n]; `next(r)` is mu_{r+1}, which is
/// 0 for r = n.
class SpectrumOnly {
public:
  explicit SpectrumOnly(Eigen::VectorXd mu) : mu_(std::move(mu)) {
    if (mu_.size() == 0) throw ArgumentError("spectrum must be non-empty");
    for (Eigen::Index i = 0; i < mu_.size(); ++i) {
      if (!(mu_[i] >= 0.0)) throw ArgumentError("spectrum must be nonnegative");
      if (i > 0 && mu_[i] > mu_[i - 1]) throw ArgumentError("spectrum must be descending");
    }
  }

  explicit SpectrumOnly(const std::vector<double>& mu)
      : SpectrumOnly(Eigen::Map<const Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(mu.size()))) {}

  [[nodiscard]] std::size_t n() const { return static_cast<std::size_t>(mu_.size()); }
  [[nodiscard]] const Eigen::VectorXd& values() const { return mu_; }
  [[nodiscard]] double operator[](std::size_t i) const { return mu_[static_cast<Eigen::Index>(i)]; }
  [[nodiscard]] double largest() const { return mu_[0]; }

  /// mu_{r+1}, with mu_{n+1} := 0.
  [[nodiscard]] double next(std::size_t r) const {
    check_level(r);
    return r == n() ? 0.0 : mu_[static_cast<Eigen::Index>(r)];
  }

  void check_level(std::size_t r) const {
    if (r < 1 || r > n()) {
      throw ArgumentError("truncation level r=" + std::to_string(r) + " outside [1, " + std::to_string(n()) + "]");
    }
  }

private:
  Eigen::VectorXd mu_;
};

class TruncatedView;

/// Full eigendecomposition K = U diag(mu) U^T with mu sorted descending.
/// Column i of `basis()` pairs with mu[i]. Immutable after construction.
class EigenSystem {
public:
  EigenSystem(SpectrumOnly spectrum, Eigen::MatrixXd basis)
      : spectrum_(std::move(spectrum)), basis_(std::move(basis)) {
    const auto n = static_cast<Eigen::Index>(spectrum_.n());
    if (basis_.rows() != n || basis_.cols() != n) {
      throw ArgumentError("eigenbasis dimension does not match spectrum");
    }
  }

  [[nodiscard]] std::size_t n() const { return spectrum_.n(); }
  [[nodiscard]] const SpectrumOnly& spectrum() const { return spectrum_; }
  [[nodiscard]] const Eigen::VectorXd& mu() const { return spectrum_.values(); }
  [[nodiscard]] const Eigen::MatrixXd& basis() const { return basis_; }

  [[nodiscard]] Eigen::MatrixXd reconstruct() const {
    return basis_ * mu().asDiagonal() * basis_.transpose();
  }

private:
  SpectrumOnly spectrum_;
  Eigen::MatrixXd basis_;
};

/// Rank-r view of an EigenSystem: (mu_1..mu_r, U_r) and mu_{r+1}. Holds a
/// reference; the EigenSystem must outlive the view.
class TruncatedView {
public:
  TruncatedView(const EigenSystem& system, std::size_t r) : system_(&system), r_(r) {
    system.spectrum().check_level(r);
  }

  [[nodiscard]] std::size_t rank() const { return r_; }
  [[nodiscard]] auto top() const { return system_->mu().head(static_cast<Eigen::Index>(r_)); }
  [[nodiscard]] auto basis() const { return system_->basis().leftCols(static_cast<Eigen::Index>(r_)); }
  [[nodiscard]] double mu_next() const { return system_->spectrum().next(r_); }
  [[nodiscard]] const EigenSystem& system() const { return *system_; }

  /// K_r = U_r D_r U_r^T, the best rank-r Frobenius approximation.
  [[nodiscard]] Eigen::MatrixXd matrix() const {
    const auto u = basis();
    return u * top().asDiagonal() * u.transpose();
  }

private:
  const EigenSystem* system_;
  std::size_t r_;
};

inline TruncatedView truncate_rank(const EigenSystem& system, std::size_t r) { return {system, r}; }

/// Eigenvalues in [-1e-10 mu_1, 0) are roundoff and clipped to zero; anything
/// more negative means the input was not PSD.
inline constexpr double kNegativeEigenvalueTolerance = 1e-10;

inline EigenSystem eigendecompose(const KernelMatrix& k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(k.entries(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw NumericError("symmetric eigensolver did not converge");

  const Eigen::Index n = k.n();
  // Eigen returns ascending order.
  Eigen::VectorXd mu = solver.eigenvalues().reverse();
  Eigen::MatrixXd u = solver.eigenvectors().rowwise().reverse();

  const double top = std::max(mu[0], 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (mu[i] < 0.0) {
      if (mu[i] < -kNegativeEigenvalueTolerance * top) {
        throw NumericError("kernel matrix is not positive semidefinite (eigenvalue " +
                           std::to_string(mu[i]) + ")");
      }
      mu[i] = 0.0;
    }
  }
  return EigenSystem(SpectrumOnly(std::move(mu)), std::move(u));
}

inline EigenSystem eigendecompose(const Eigen::MatrixXd& k) { return eigendecompose(KernelMatrix(k)); }

enum class DecayKind { Polynomial, Exponential };

/// Synthetic eigendecay for rate studies.
///   Polynomial(alpha):  mu_i = scale * i^(-2 alpha)
///   Exponential(c):     mu_i = scale * exp(-c i log(i+1))
/// log(i+1) rather than log(i) keeps mu_1 < scale strictly decaying from i = 1.
struct SyntheticDecay {
  DecayKind kind = DecayKind::Polynomial;
  double parameter = 1.0;

  static SyntheticDecay polynomial(double alpha) { return {DecayKind::Polynomial, alpha}; }
  static SyntheticDecay exponential(double c) { return {DecayKind::Exponential, c}; }
};

inline SpectrumOnly synthetic_spectrum(const SyntheticDecay& decay, std::size_t n, double scale = 1.0) {
  if (n < 1) throw ArgumentError("synthetic spectrum requires n >= 1");
  if (!(decay.parameter > 0.0)) throw ArgumentError("decay parameter must be positive");
  if (!(scale > 0.0)) throw ArgumentError("spectrum scale must be positive");
  Eigen::VectorXd mu(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const double i = static_cast<double>(k + 1);
    mu[static_cast<Eigen::Index>(k)] = decay.kind == DecayKind::Polynomial
                                           ? scale * std::pow(i, -2.0 * decay.parameter)
                                           : scale * std::exp(-decay.parameter * i * std::log(i + 1.0));
  }
  return SpectrumOnly(std::move(mu));
}

}  // namespace stkrr
