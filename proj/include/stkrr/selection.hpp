#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "stkrr/error.hpp"
#include "stkrr/golden_section.hpp"
#include "stkrr/risk.hpp"
#include "stkrr/spectral.hpp"

namespace stkrr {

/// Exact maximum-risk curve for one truncation level, lambda ascending.
struct RiskCurve {
  std::size_t r = 0;
  std::vector<RiskPoint> points;
  std::size_t argmin_index = 0;
  double argmin_lambda = 0.0;
  double min_risk = 0.0;
  bool boundary = false;  // minimum sits on the first or last grid point
};

/// Lambda search settings. The coarse grid spans [lower_factor, upper_factor] * mu_1.
struct SearchConfig {
  double lower_factor = 1e-6;
  double upper_factor = 10.0;
  std::size_t grid_points = 400;
  double relative_tolerance = 1e-6;
  std::size_t max_iterations = 500;
};

struct LambdaSearchResult {
  double lambda = 0.0;
  RiskPoint risk;
  double bracket_lo = 0.0;  // coarse-grid neighbours of the grid minimum
  double bracket_hi = 0.0;
  bool boundary = false;
};

struct TruncationReport {
  std::size_t n = 0;
  double sigma2 = 0.0;
  double lambda_n = 0.0;
  std::size_t r_n = 0;
  double lambda_truncated = 0.0;
  double min_risk_full = 0.0;
  double min_risk_truncated = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  bool boundary = false;
  std::vector<std::pair<double, std::size_t>> r_of_lambda_table;
};

struct DominationReport {
  double lhs = 0.0;  // max_mse(r, lambda)
  double rhs = 0.0;  // max_mse(n, lambda)
  bool holds = false;
  bool strict = false;
  bool strict_expected = false;  // mu_{r+1} > 0
};

/// `count` log-spaced points from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi > lo)) throw ArgumentError("log grid requires 0 < lo < hi");
  if (count < 2) return {lo};
  std::vector<double> grid(count);
  const double a = std::log(lo);
  const double step = (std::log(hi) - a) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) grid[i] = std::exp(a + step * static_cast<double>(i));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

inline RiskCurve risk_curve(const SpectrumOnly& spectrum, std::size_t r, const std::vector<double>& lambda_grid,
                            const NoiseModel& noise, double radius = 1.0) {
  if (lambda_grid.empty()) throw ArgumentError("lambda grid is empty");
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    if (!(lambda_grid[i] > 0.0)) throw ArgumentError("lambda grid must be positive");
    if (i > 0 && !(lambda_grid[i] > lambda_grid[i - 1])) throw ArgumentError("lambda grid must be strictly increasing");
  }
  RiskCurve curve;
  curve.r = r;
  curve.points.reserve(lambda_grid.size());
  for (const double lambda : lambda_grid) curve.points.push_back(max_mse(spectrum, r, lambda, noise, radius));

  // Strict comparison breaks ties toward the smaller lambda.
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    if (curve.points[i].max_mse < curve.points[curve.argmin_index].max_mse) curve.argmin_index = i;
  }
  curve.argmin_lambda = curve.points[curve.argmin_index].lambda;
  curve.min_risk = curve.points[curve.argmin_index].max_mse;
  curve.boundary = curve.points.size() > 1 &&
                   (curve.argmin_index == 0 || curve.argmin_index + 1 == curve.points.size());
  return curve;
}

/// Coarse log-grid scan, then golden-section refinement in log(lambda) on the
/// neighbouring grid interval. The objective has max() kinks, so no derivatives.
inline LambdaSearchResult minimize_lambda(const SpectrumOnly& spectrum, std::size_t r, const NoiseModel& noise,
                                          const SearchConfig& search = {}) {
  const double mu1 = spectrum.largest();
  if (!(mu1 > 0.0)) throw DegenerateError("cannot minimize over lambda for an all-zero spectrum");
  if (search.grid_points < 2) throw ArgumentError("lambda search needs at least two grid points");

  const auto grid = log_grid(search.lower_factor * mu1, search.upper_factor * mu1, search.grid_points);
  const RiskCurve curve = risk_curve(spectrum, r, grid, noise);
  const std::size_t i = curve.argmin_index;

  LambdaSearchResult result;
  result.bracket_lo = grid[i == 0 ? 0 : i - 1];
  result.bracket_hi = grid[std::min(i + 1, grid.size() - 1)];
  result.boundary = curve.boundary;
  result.lambda = curve.argmin_lambda;
  result.risk = curve.points[i];

  const auto objective = [&](double log_lambda) { return max_mse(spectrum, r, std::exp(log_lambda), noise).max_mse; };
  const ScalarMinimum refined =
      golden_section_minimize(objective, std::log(result.bracket_lo), std::log(result.bracket_hi),
                              std::log1p(search.relative_tolerance), search.max_iterations);
  const double lambda = std::exp(refined.x);
  const RiskPoint polished = max_mse(spectrum, r, lambda, noise);
  if (polished.max_mse < result.risk.max_mse || (polished.max_mse == result.risk.max_mse && lambda < result.lambda)) {
    result.lambda = lambda;
    result.risk = polished;
  }
  return result;
}

/// r(lambda) = min{ r in [1, n] : mu_{r+1} <= H_n(lambda) }; r = n always qualifies.
inline std::size_t r_of_lambda(const SpectrumOnly& spectrum, double lambda) {
  if (!(lambda > 0.0)) throw ArgumentError("lambda must be positive");
  const std::size_t n = spectrum.n();
  const double peak = retained_peak(spectrum, n, lambda);
  for (std::size_t r = 1; r < n; ++r) {
    if (spectrum.next(r) <= peak) return r;
  }
  return n;
}

/// Optimal truncation: lambda_n minimizes the full-KRR maximum risk,
/// r_n = r(lambda_n), then lambda is re-optimized at r_n.
inline TruncationReport optimal_truncation(const SpectrumOnly& spectrum, const NoiseModel& noise,
                                           const SearchConfig& search = {}) {
  const std::size_t n = spectrum.n();
  const LambdaSearchResult full = minimize_lambda(spectrum, n, noise, search);

  TruncationReport report;
  report.n = n;
  report.sigma2 = noise.sigma2;
  report.lambda_n = full.lambda;
  report.min_risk_full = full.risk.max_mse;
  report.bracket_lo = full.bracket_lo;
  report.bracket_hi = full.bracket_hi;
  report.boundary = full.boundary;
  report.r_n = r_of_lambda(spectrum, full.lambda);

  const LambdaSearchResult truncated = minimize_lambda(spectrum, report.r_n, noise, search);
  report.lambda_truncated = truncated.lambda;
  report.min_risk_truncated = truncated.risk.max_mse;
  // lambda_n itself is a candidate for the truncated problem.
  const double at_lambda_n = max_mse(spectrum, report.r_n, full.lambda, noise).max_mse;
  if (at_lambda_n < report.min_risk_truncated) {
    report.lambda_truncated = full.lambda;
    report.min_risk_truncated = at_lambda_n;
  }

  const double mu1 = spectrum.largest();
  for (const double lambda : log_grid(search.lower_factor * mu1, search.upper_factor * mu1, search.grid_points)) {
    report.r_of_lambda_table.emplace_back(lambda, r_of_lambda(spectrum, lambda));
  }
  return report;
}

/// Compares truncated and full maximum risk at one lambda. Only defined for
/// r >= r(lambda).
inline DominationReport domination_check(const SpectrumOnly& spectrum, const NoiseModel& noise, double lambda,
                                         std::size_t r) {
  spectrum.check_level(r);
  if (r < r_of_lambda(spectrum, lambda)) {
    throw PreconditionError("domination only holds for r >= r(lambda)");
  }
  DominationReport report;
  report.lhs = max_mse(spectrum, r, lambda, noise).max_mse;
  report.rhs = max_mse(spectrum, spectrum.n(), lambda, noise).max_mse;
  report.holds = report.lhs <= report.rhs;
  report.strict = report.lhs < report.rhs;
  report.strict_expected = spectrum.next(r) > 0.0;
  return report;
}

}  // namespace stkrr
