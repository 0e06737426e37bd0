#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "stkrr/error.hpp"
#include "stkrr/risk.hpp"
#include "stkrr/selection.hpp"
#include "stkrr/spectral.hpp"

namespace stkrr {

struct RatePoint {
  double gamma = 0.0;
  double lambda_star = 0.0;
  double min_risk = 0.0;
};

/// Least-squares fit of log(min risk) against log(gamma) (polynomial decay) or
/// against log(gamma log(1/gamma)) (exponential decay).
struct RateFit {
  DecayKind kind = DecayKind::Polynomial;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double lambda_slope = 0.0;  // log(lambda_n) against the same regressor
  bool reliable = false;
  std::vector<RatePoint> points;
};

/// gamma = 2^-6 .. 2^-20.
inline std::vector<double> default_gamma_sweep() {
  std::vector<double> sweep;
  for (int k = 6; k <= 20; ++k) sweep.push_back(std::ldexp(1.0, -k));
  return sweep;
}

/// Exponent 2 alpha / (2 alpha + 1) for polynomial decay mu_i ~ i^(-2 alpha).
inline double polynomial_rate_exponent(double alpha) { return 2.0 * alpha / (2.0 * alpha + 1.0); }

namespace detail {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto m = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 0.0;
  return fit;
}

}  // namespace detail

inline RateFit rate_fit(const SpectrumOnly& spectrum, const std::vector<double>& gamma_sweep, DecayKind kind,
                        const SearchConfig& search = {}) {
  if (gamma_sweep.size() < 4) throw ArgumentError("rate fit needs at least four gamma values");
  for (const double g : gamma_sweep) {
    if (!(g > 0.0)) throw ArgumentError("gamma values must be positive");
    if (kind == DecayKind::Exponential && !(g < 1.0)) throw ArgumentError("exponential rate fit needs gamma < 1");
  }
  const auto [lo, hi] = std::minmax_element(gamma_sweep.begin(), gamma_sweep.end());
  if (*hi / *lo < 1e3) throw ArgumentError("gamma sweep must span at least three decades");

  const std::size_t n = spectrum.n();
  RateFit result;
  result.kind = kind;
  std::vector<double> x, y, y_lambda;
  bool interior = true;
  for (const double g : gamma_sweep) {
    const NoiseModel noise(g * static_cast<double>(n), n);
    const LambdaSearchResult best = minimize_lambda(spectrum, n, noise, search);
    interior = interior && !best.boundary;
    result.points.push_back({g, best.lambda, best.risk.max_mse});
    x.push_back(kind == DecayKind::Polynomial ? std::log(g) : std::log(g * std::log(1.0 / g)));
    y.push_back(std::log(best.risk.max_mse));
    y_lambda.push_back(std::log(best.lambda));
  }

  const auto line = detail::least_squares_line(x, y);
  result.slope = line.slope;
  result.intercept = line.intercept;
  result.r_squared = line.r_squared;
  result.lambda_slope = detail::least_squares_line(x, y_lambda).slope;

  // A flat spectrum has no decay class to recover.
  const bool decays = spectrum[n - 1] < spectrum.largest() * (1.0 - 1e-9);
  result.reliable = decays && interior && line.r_squared >= 0.99;
  return result;
}

inline RateFit rate_fit(const SyntheticDecay& decay, std::size_t n, const std::vector<double>& gamma_sweep,
                        const SearchConfig& search = {}) {
  return rate_fit(synthetic_spectrum(decay, n), gamma_sweep, decay.kind, search);
}

}  // namespace stkrr
