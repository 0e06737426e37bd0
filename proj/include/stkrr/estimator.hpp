#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "stkrr/error.hpp"
#include "stkrr/kernel.hpp"
#include "stkrr/random.hpp"
#include "stkrr/spectral.hpp"

namespace stkrr {

/// Fitted r-truncated, lambda-regularized KRR solution in spectral coordinates.
///
/// omega = U_r alpha lies in ran(U_r), so K_r omega = K omega holds by
/// construction. fitted_u = K omega are the fitted values divided by sqrt(n).
struct TruncatedEstimate {
  std::size_t r = 0;
  double lambda = 0.0;
  Eigen::VectorXd alpha;        // r spectral coefficients
  Eigen::VectorXd omega;        // n kernel-section weights
  Eigen::VectorXd fitted_u;     // n, u-space fitted values
  Eigen::VectorXd retained_mu;  // mu_1..mu_r paired with alpha
};

/// Noise-free target f* = f_{omega*} with u* = K omega*.
struct TargetFunction {
  Eigen::VectorXd omega_star;
  Eigen::VectorXd u_star;
  double hilbert_norm_sq = 0.0;
};

namespace detail {

inline void check_fit_arguments(const EigenSystem& system, std::size_t r, double lambda) {
  if (!(lambda > 0.0)) throw ArgumentError("lambda must be positive");
  system.spectrum().check_level(r);
  if (!(system.spectrum()[r - 1] > 0.0)) {
    throw RankError("truncation level r=" + std::to_string(r) + " exceeds the numerical rank (mu_r = 0)");
  }
}

}  // namespace detail

/// Solves the truncated problem for observations y (not yet divided by sqrt(n)).
/// With z = U_r^T y / sqrt(n): alpha_i = z_i / (mu_i + lambda) and
/// fitted_u = U_r diag(mu_i alpha_i).
inline TruncatedEstimate fit(const EigenSystem& system, std::size_t r, double lambda, const Eigen::VectorXd& y) {
  detail::check_fit_arguments(system, r, lambda);
  if (static_cast<std::size_t>(y.size()) != system.n()) throw ArgumentError("observation vector has wrong length");

  const auto view = truncate_rank(system, r);
  const auto u_r = view.basis();
  const Eigen::VectorXd mu_r = view.top();

  const Eigen::VectorXd z = u_r.transpose() * (y / std::sqrt(static_cast<double>(system.n())));

  TruncatedEstimate est;
  est.r = r;
  est.lambda = lambda;
  est.alpha = z.array() / (mu_r.array() + lambda);
  est.omega = u_r * est.alpha;
  est.fitted_u = u_r * (mu_r.array() * est.alpha.array()).matrix();
  est.retained_mu = mu_r;
  return est;
}

/// f(x) = (1/sqrt(n)) sum_j omega_j k(x, x_j).
inline double predict_at(const TruncatedEstimate& est, const KernelSpec& spec, const DesignPoints& design, double x) {
  if (static_cast<std::size_t>(est.omega.size()) != design.size()) {
    throw ArgumentError("estimate and design have different sizes");
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < design.size(); ++j) {
    acc += est.omega[static_cast<Eigen::Index>(j)] * spec(x, design[j]);
  }
  return acc / std::sqrt(static_cast<double>(design.size()));
}

/// ||f||_H^2 = omega^T K omega = sum_i mu_i alpha_i^2.
inline double hilbert_norm_sq(const TruncatedEstimate& est) {
  return (est.retained_mu.array() * est.alpha.array().square()).sum();
}

/// Noise-free fit: passes sqrt(n) u* through `fit`, giving fitted_u = Psi_lambda u*.
inline TruncatedEstimate approximant(const EigenSystem& system, std::size_t r, double lambda,
                                     const TargetFunction& target) {
  return fit(system, r, lambda, target.u_star * std::sqrt(static_cast<double>(system.n())));
}

inline TargetFunction make_target(const KernelMatrix& k, Eigen::VectorXd omega_star) {
  if (omega_star.size() != k.n()) throw ArgumentError("target weight vector has wrong length");
  TargetFunction t;
  t.u_star = k.entries() * omega_star;
  t.hilbert_norm_sq = omega_star.dot(t.u_star);
  t.omega_star = std::move(omega_star);
  return t;
}

/// Target whose spectral coordinates are v* = U^T u*; requires mu_i > 0
/// wherever v*_i != 0 (omega* = U D^{-1} v*).
inline TargetFunction target_from_spectral(const EigenSystem& system, const KernelMatrix& k, const Eigen::VectorXd& v_star) {
  if (static_cast<std::size_t>(v_star.size()) != system.n()) throw ArgumentError("v* has wrong length");
  Eigen::VectorXd scaled(v_star.size());
  for (Eigen::Index i = 0; i < v_star.size(); ++i) {
    if (v_star[i] == 0.0) {
      scaled[i] = 0.0;
    } else if (system.mu()[i] > 0.0) {
      scaled[i] = v_star[i] / system.mu()[i];
    } else {
      throw RankError("v* has mass on a zero eigenvalue");
    }
  }
  return make_target(k, system.basis() * scaled);
}

/// Random unit-ball target: omega* ~ N(0, I_n), rescaled so omega*^T K omega* = 1.
inline TargetFunction sample_ball_target(const EigenSystem& system, const KernelMatrix& k, std::uint64_t seed) {
  if (system.n() != static_cast<std::size_t>(k.n())) throw ArgumentError("eigensystem and kernel matrix differ in size");
  Engine engine = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index n = k.n();
  for (;;) {
    Eigen::VectorXd omega(n);
    for (Eigen::Index i = 0; i < n; ++i) omega[i] = normal(engine);
    const double q = omega.dot(k.entries() * omega);
    if (q > 0.0) return make_target(k, omega / std::sqrt(q));
  }
}

}  // namespace stkrr
