#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "stkrr/error.hpp"
#include "stkrr/estimator.hpp"
#include "stkrr/kernel.hpp"
#include "stkrr/random.hpp"
#include "stkrr/risk.hpp"
#include "stkrr/spectral.hpp"

namespace stkrr {

enum class TargetMode { FreshPerReplication, FixedAcrossReplications };

/// All three are isotropic with per-coordinate variance sigma^2.
enum class NoiseDistribution {
  Gaussian,       // sigma * N(0, 1) per coordinate
  Rademacher,     // sigma * (+-1) per coordinate
  UniformSphere,  // sigma * sqrt(n) * uniform point on the unit sphere
};

struct SimulationConfig {
  KernelSpec kernel = KernelSpec::sobolev1();
  DesignScheme scheme = DesignScheme::EquispacedOpenLeft;
  std::size_t n = 200;
  double sigma = 2.0;
  std::vector<double> lambda_grid;
  std::vector<std::size_t> r_values;
  std::size_t replications = 1000;
  std::uint64_t base_seed = 0;
  TargetMode target_mode = TargetMode::FixedAcrossReplications;
  NoiseDistribution noise_dist = NoiseDistribution::Gaussian;
};

struct SimulationRow {
  double lambda = 0.0;
  std::size_t r = 0;
  double mean_mse = 0.0;
  double stderr_mse = 0.0;
  std::size_t reps = 0;
  double theory_max_mse = 0.0;
};

struct SimulationReport {
  SimulationConfig config;
  std::vector<SimulationRow> rows;           // r in config order, lambda ascending within r
  std::vector<std::uint64_t> replication_seeds;
  std::uint64_t target_seed = 0;             // fixed-target mode only
};

/// Welford accumulator; `merge` combines partial results from independent runs.
struct RunningStats {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  void merge(const RunningStats& other) {
    if (other.count == 0) return;
    const std::size_t total = count + other.count;
    const double delta = other.mean - mean;
    mean += delta * static_cast<double>(other.count) / static_cast<double>(total);
    m2 += other.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(other.count) /
                         static_cast<double>(total);
    count = total;
  }

  [[nodiscard]] double sample_variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  [[nodiscard]] double standard_error() const {
    return count > 0 ? std::sqrt(sample_variance() / static_cast<double>(count)) : 0.0;
  }
};

/// ||u - u*||^2, which equals ||f - f*||_n^2 under the u-transform.
inline double empirical_mse(const Eigen::VectorXd& fitted_u, const Eigen::VectorXd& u_star) {
  if (fitted_u.size() != u_star.size()) throw ArgumentError("empirical_mse: length mismatch");
  return (fitted_u - u_star).squaredNorm();
}

inline Eigen::VectorXd draw_noise(NoiseDistribution dist, double sigma, std::size_t n, Engine& engine) {
  const auto size = static_cast<Eigen::Index>(n);
  Eigen::VectorXd w(size);
  switch (dist) {
    case NoiseDistribution::Gaussian: {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (Eigen::Index i = 0; i < size; ++i) w[i] = sigma * normal(engine);
      break;
    }
    case NoiseDistribution::Rademacher: {
      for (Eigen::Index i = 0; i < size; ++i) w[i] = (engine() >> 63) != 0 ? sigma : -sigma;
      break;
    }
    case NoiseDistribution::UniformSphere: {
      std::normal_distribution<double> normal(0.0, 1.0);
      double norm = 0.0;
      do {
        for (Eigen::Index i = 0; i < size; ++i) w[i] = normal(engine);
        norm = w.norm();
      } while (norm == 0.0);
      w *= sigma * std::sqrt(static_cast<double>(n)) / norm;
      break;
    }
  }
  return w;
}

/// Deterministic part of the risk for one target: ||(I - Gamma_lambda) v*||^2
/// with v* = U^T u*.
inline double approximation_error(const EigenSystem& system, std::size_t r, double lambda, const TargetFunction& target) {
  if (!(lambda > 0.0)) throw ArgumentError("lambda must be positive");
  system.spectrum().check_level(r);
  const Eigen::VectorXd v = system.basis().transpose() * target.u_star;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double keep = static_cast<std::size_t>(i) < r ? lambda / (system.mu()[i] + lambda) : 1.0;
    acc += keep * keep * v[i] * v[i];
  }
  return acc;
}

/// Max of AE + EE over the given targets. Never exceeds max_mse for unit-ball targets.
inline double max_over_targets(const EigenSystem& system, double lambda, std::size_t r, const NoiseModel& noise,
                               std::span<const TargetFunction> targets) {
  if (targets.empty()) throw ArgumentError("probe needs at least one target");
  const double ee = estimation_error(system.spectrum(), r, lambda, noise);
  double best = 0.0;
  for (const auto& t : targets) best = std::max(best, approximation_error(system, r, lambda, t) + ee);
  return best;
}

/// Sampled lower estimate of the supremum over the unit ball; target t uses
/// split_seed(seed, t).
inline double max_over_ball_probe(const EigenSystem& system, const KernelMatrix& k, double lambda, std::size_t r,
                                  const NoiseModel& noise, std::size_t num_targets, std::uint64_t seed) {
  if (num_targets < 1) throw ArgumentError("probe needs at least one target");
  std::vector<TargetFunction> targets;
  targets.reserve(num_targets);
  for (std::size_t t = 0; t < num_targets; ++t) targets.push_back(sample_ball_target(system, k, split_seed(seed, t)));
  return max_over_targets(system, lambda, r, noise, targets);
}

namespace detail {

inline void validate(const SimulationConfig& config, const EigenSystem& system, const KernelMatrix& k) {
  if (config.replications < 1) throw ArgumentError("simulation needs at least one replication");
  if (!(config.sigma >= 0.0)) throw ArgumentError("noise standard deviation must be nonnegative");
  if (config.n != system.n() || static_cast<Eigen::Index>(config.n) != k.n()) {
    throw ArgumentError("simulation n does not match the kernel matrix");
  }
  if (config.lambda_grid.empty()) throw ArgumentError("simulation lambda grid is empty");
  for (const double lambda : config.lambda_grid) {
    if (!(lambda > 0.0)) throw ArgumentError("simulation lambda values must be positive");
  }
  if (config.r_values.empty()) throw ArgumentError("simulation needs at least one truncation level");
  for (const std::size_t r : config.r_values) {
    system.spectrum().check_level(r);
    if (!(system.mu()[static_cast<Eigen::Index>(r - 1)] > 0.0)) {
      throw RankError("truncation level r=" + std::to_string(r) + " exceeds the numerical rank (mu_r = 0)");
    }
  }
}

}  // namespace detail

/// Monte-Carlo empirical MSE for every (lambda, r).
///
/// Replication k draws its noise (and, in fresh mode, its target) from
/// split_seed(base_seed, k); a fresh target uses split_seed(that seed, 0). The
/// fixed target uses base_seed. Errors are computed in spectral coordinates:
/// with z = U^T y~ and v* = U^T u*, ||fitted_u - u*||^2 =
/// sum_{i<=r} (g_i z_i - v*_i)^2 + sum_{i>r} v*_i^2, g_i = mu_i / (mu_i + lambda).
inline SimulationReport run_replications(const SimulationConfig& config, const EigenSystem& system,
                                         const KernelMatrix& k) {
  detail::validate(config, system, k);

  const auto n = static_cast<Eigen::Index>(config.n);
  const double root_n = std::sqrt(static_cast<double>(config.n));
  const Eigen::MatrixXd& basis = system.basis();
  const Eigen::VectorXd& mu = system.mu();
  const std::size_t num_lambda = config.lambda_grid.size();
  const std::size_t num_r = config.r_values.size();

  // shrink(i, l) = mu_i / (mu_i + lambda_l)
  Eigen::MatrixXd shrink(n, static_cast<Eigen::Index>(num_lambda));
  for (std::size_t l = 0; l < num_lambda; ++l) {
    shrink.col(static_cast<Eigen::Index>(l)) = mu.array() / (mu.array() + config.lambda_grid[l]);
  }

  SimulationReport report;
  report.config = config;
  report.replication_seeds.reserve(config.replications);
  report.target_seed = config.base_seed;

  TargetFunction fixed;
  if (config.target_mode == TargetMode::FixedAcrossReplications) fixed = sample_ball_target(system, k, config.base_seed);

  std::vector<RunningStats> stats(num_lambda * num_r);
  Eigen::VectorXd tail(n + 1);
  for (std::size_t rep = 0; rep < config.replications; ++rep) {
    const std::uint64_t seed = split_seed(config.base_seed, rep);
    report.replication_seeds.push_back(seed);

    const TargetFunction target = config.target_mode == TargetMode::FixedAcrossReplications
                                      ? fixed
                                      : sample_ball_target(system, k, split_seed(seed, 0));
    Engine engine = make_engine(seed);
    const Eigen::VectorXd w = draw_noise(config.noise_dist, config.sigma, config.n, engine);

    const Eigen::VectorXd v = basis.transpose() * target.u_star;
    const Eigen::VectorXd z = basis.transpose() * (target.u_star + w / root_n);

    // tail[i] = sum_{j >= i} v_j^2
    tail[n] = 0.0;
    for (Eigen::Index i = n - 1; i >= 0; --i) tail[i] = tail[i + 1] + v[i] * v[i];

    for (std::size_t ri = 0; ri < num_r; ++ri) {
      const auto r = static_cast<Eigen::Index>(config.r_values[ri]);
      for (std::size_t l = 0; l < num_lambda; ++l) {
        const auto g = shrink.col(static_cast<Eigen::Index>(l));
        double err = tail[r];
        for (Eigen::Index i = 0; i < r; ++i) {
          const double d = g[i] * z[i] - v[i];
          err += d * d;
        }
        stats[ri * num_lambda + l].add(err);
      }
    }
  }

  const NoiseModel noise(config.sigma * config.sigma, config.n);
  report.rows.reserve(stats.size());
  for (std::size_t ri = 0; ri < num_r; ++ri) {
    for (std::size_t l = 0; l < num_lambda; ++l) {
      const RunningStats& s = stats[ri * num_lambda + l];
      SimulationRow row;
      row.lambda = config.lambda_grid[l];
      row.r = config.r_values[ri];
      row.mean_mse = s.mean;
      row.stderr_mse = s.standard_error();
      row.reps = s.count;
      row.theory_max_mse = max_mse(system.spectrum(), row.r, row.lambda, noise).max_mse;
      report.rows.push_back(row);
    }
  }
  return report;
}

}  // namespace stkrr
