#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "stkrr/error.hpp"
#include "stkrr/spectral.hpp"

namespace stkrr {

/// Noise variance sigma^2 and sample count n; gamma = sigma^2 / n.
struct NoiseModel {
  double sigma2 = 0.0;
  std::size_t n = 1;

  NoiseModel() = default;
  NoiseModel(double sigma2_, std::size_t n_) : sigma2(sigma2_), n(n_) {
    if (!(sigma2 >= 0.0)) throw ArgumentError("noise variance must be nonnegative");
    if (n < 1) throw ArgumentError("noise model requires n >= 1");
  }

  [[nodiscard]] double gamma() const { return sigma2 / static_cast<double>(n); }
};

/// One point of the exact maximum-risk curve.
struct RiskPoint {
  double lambda = 0.0;
  std::size_t r = 0;
  double wae = 0.0;      // worst-case approximation error
  double ee = 0.0;       // estimation error
  double max_mse = 0.0;  // wae + ee
};

/// h_lambda(x) = lambda^2 x / (x + lambda)^2, maximized at x = lambda with value lambda/4.
inline double h(double lambda, double x) {
  const double d = x + lambda;
  return lambda * lambda * x / (d * d);
}

namespace detail {

inline void check_lambda(double lambda) {
  if (!(lambda > 0.0)) throw ArgumentError("lambda must be positive");
}

}  // namespace detail

/// max over i <= r of h_lambda(mu_i).
inline double retained_peak(const SpectrumOnly& spectrum, std::size_t r, double lambda) {
  spectrum.check_level(r);
  double best = 0.0;
  for (std::size_t i = 0; i < r; ++i) best = std::max(best, h(lambda, spectrum[i]));
  return best;
}

/// Worst-case approximation error over the unit ball:
/// max( max_{i<=r} h_lambda(mu_i), mu_{r+1} ).
inline double wae(const SpectrumOnly& spectrum, std::size_t r, double lambda) {
  detail::check_lambda(lambda);
  return std::max(retained_peak(spectrum, r, lambda), spectrum.next(r));
}

/// gamma * sum_{i<=r} (mu_i / (mu_i + lambda))^2. Summed in index order, so the
/// result is nondecreasing in r in floating point as well.
inline double estimation_error(const SpectrumOnly& spectrum, std::size_t r, double lambda, const NoiseModel& noise) {
  detail::check_lambda(lambda);
  spectrum.check_level(r);
  double acc = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    const double g = spectrum[i] / (spectrum[i] + lambda);
    acc += g * g;
  }
  return noise.gamma() * acc;
}

/// Exact maximum MSE over the Hilbert ball of the given radius. A radius R is
/// handled by scaling: sigma^2 -> sigma^2 / R^2, then multiplying by R^2.
inline RiskPoint max_mse(const SpectrumOnly& spectrum, std::size_t r, double lambda, const NoiseModel& noise,
                         double radius = 1.0) {
  if (!(radius > 0.0)) throw ArgumentError("ball radius must be positive");
  const double r2 = radius * radius;
  const NoiseModel scaled(noise.sigma2 / r2, noise.n);
  RiskPoint p;
  p.lambda = lambda;
  p.r = r;
  p.wae = r2 * wae(spectrum, r, lambda);
  p.ee = r2 * estimation_error(spectrum, r, lambda, scaled);
  p.max_mse = p.wae + p.ee;
  return p;
}

/// max(lambda/4, mu_{r+1}); never below `wae` for matching arguments.
inline double wae_upper(double lambda, double mu_next) {
  detail::check_lambda(lambda);
  if (!(mu_next >= 0.0)) throw ArgumentError("mu_{r+1} must be nonnegative");
  return std::max(lambda / 4.0, mu_next);
}

/// Sup over the unit ball of ||f* - f_bar||_n^2 + lambda ||f_bar||_H^2 for the
/// noise-free fit: max( max_{i<=n} lambda mu_i / (mu_i + lambda), mu_{r+1} ).
inline double regularized_risk_sup(const SpectrumOnly& spectrum, std::size_t r, double lambda) {
  detail::check_lambda(lambda);
  double inner = 0.0;
  for (std::size_t i = 0; i < spectrum.n(); ++i) {
    inner = std::max(inner, lambda * spectrum[i] / (spectrum[i] + lambda));
  }
  return std::max(inner, spectrum.next(r));
}

/// Same quantity using that x -> lambda x / (x + lambda) is increasing, so the
/// inner max sits at mu_1.
inline double regularized_risk_sup_closed_form(const SpectrumOnly& spectrum, std::size_t r, double lambda) {
  detail::check_lambda(lambda);
  const double mu1 = spectrum.largest();
  return std::max(lambda * mu1 / (mu1 + lambda), spectrum.next(r));
}

/// Truncated kernel complexity R_r(delta) = (gamma sum_{i<=r} min(mu_i, delta^2))^{1/2}.
/// r = 0 is the empty sum.
inline double kernel_complexity(const SpectrumOnly& spectrum, std::size_t r, double delta, const NoiseModel& noise) {
  if (!(delta > 0.0)) throw ArgumentError("delta must be positive");
  if (r > spectrum.n()) throw ArgumentError("truncation level exceeds n");
  const double d2 = delta * delta;
  double acc = 0.0;
  for (std::size_t i = 0; i < r; ++i) acc += std::min(spectrum[i], d2);
  return std::sqrt(noise.gamma() * acc);
}

/// Looser bound lambda/4 + (R_r(delta)/delta)^2, valid for
/// lambda >= max(delta^2, 4 mu_{r+1}).
///
/// For lambda >= mu_1 the first term tightens to max(mu_1 lambda^2/(lambda+mu_1)^2, mu_{r+1}):
/// every retained h_lambda(mu_i) is at most h_lambda(mu_1) there, but the
/// discarded mu_{r+1} can still exceed it.
inline double weak_bound(const SpectrumOnly& spectrum, std::size_t r, double lambda, double delta,
                         const NoiseModel& noise) {
  detail::check_lambda(lambda);
  if (!(delta > 0.0)) throw ArgumentError("delta must be positive");
  const double mu_next = spectrum.next(r);
  if (lambda < std::max(delta * delta, 4.0 * mu_next)) {
    throw PreconditionError("weak bound requires lambda >= max(delta^2, 4 mu_{r+1})");
  }
  const double mu1 = spectrum.largest();
  const double first = lambda >= mu1 ? std::max(h(lambda, mu1), mu_next) : lambda / 4.0;
  const double ratio = kernel_complexity(spectrum, r, delta, noise) / delta;
  return first + ratio * ratio;
}

/// Solves delta^2 = 2 R_n(delta) by bisection. delta^2 / R_n(delta) is
/// increasing, so the crossing is unique.
inline double critical_radius(const SpectrumOnly& spectrum, const NoiseModel& noise) {
  if (!(noise.sigma2 > 0.0)) throw ArgumentError("critical radius requires sigma^2 > 0");
  const double mu1 = spectrum.largest();
  if (!(mu1 > 0.0)) throw DegenerateError("critical radius undefined for an all-zero spectrum");

  const std::size_t n = spectrum.n();
  const auto residual = [&](double delta) { return delta * delta - 2.0 * kernel_complexity(spectrum, n, delta, noise); };

  double lo = 1e-12;
  double hi = std::sqrt(mu1) + 2.0 * std::sqrt(noise.gamma() * static_cast<double>(n) * mu1);
  for (int i = 0; i < 200 && residual(hi) < 0.0; ++i) hi *= 2.0;
  if (residual(lo) >= 0.0 || residual(hi) < 0.0) {
    throw DegenerateError("critical radius not bracketed");
  }

  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (residual(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(residual(lo)) < std::abs(residual(hi)) ? lo : hi;
}

struct StatisticalDimension {
  std::size_t value = 0;  // n + 1 when no eigenvalue is at or below delta^2
  bool found = false;
};

/// Smallest r with mu_r <= delta^2.
inline StatisticalDimension statistical_dimension(const SpectrumOnly& spectrum, double delta) {
  if (!(delta > 0.0)) throw ArgumentError("delta must be positive");
  const double d2 = delta * delta;
  for (std::size_t i = 0; i < spectrum.n(); ++i) {
    if (spectrum[i] <= d2) return {i + 1, true};
  }
  return {spectrum.n() + 1, false};
}

}  // namespace stkrr
