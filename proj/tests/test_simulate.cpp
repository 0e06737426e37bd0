#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "stkrr/estimator.hpp"
#include "stkrr/kernel.hpp"
#include "stkrr/selection.hpp"
#include "stkrr/simulate.hpp"
#include "stkrr/spectral.hpp"

namespace {

using stkrr::NoiseModel;
using stkrr::SimulationConfig;

struct Problem {
  stkrr::KernelSpec spec;
  stkrr::DesignPoints design;
  stkrr::KernelMatrix k;
  stkrr::EigenSystem system;
};

Problem sobolev_problem(std::size_t n) {
  auto spec = stkrr::KernelSpec::sobolev1();
  auto design = stkrr::make_design(spec, n, stkrr::DesignScheme::EquispacedOpenLeft);
  auto k = stkrr::kernel_matrix(spec, design);
  auto system = stkrr::eigendecompose(k);
  return {spec, std::move(design), std::move(k), std::move(system)};
}

SimulationConfig base_config(std::size_t n, double sigma) {
  SimulationConfig c;
  c.n = n;
  c.sigma = sigma;
  return c;
}

TEST(EmpiricalMse, Examples) {
  EXPECT_EQ(stkrr::empirical_mse(Eigen::Vector2d(1.0, 2.0), Eigen::Vector2d(1.0, 2.0)), 0.0);
  EXPECT_EQ(stkrr::empirical_mse(Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 0.0)), 1.0);
  EXPECT_THROW((void)stkrr::empirical_mse(Eigen::Vector2d(1.0, 0.0), Eigen::Vector3d(0.0, 0.0, 0.0)),
               stkrr::ArgumentError);
}

TEST(EmpiricalMse, MatchesFunctionSpaceDistance) {
  const auto p = sobolev_problem(30);
  std::mt19937_64 rng(41);
  std::normal_distribution<double> normal;
  Eigen::VectorXd y(30);
  for (Eigen::Index i = 0; i < 30; ++i) y[i] = normal(rng);
  const auto est = stkrr::fit(p.system, 6, 0.01, y);
  const auto target = stkrr::sample_ball_target(p.system, p.k, 9);
  stkrr::TruncatedEstimate star;
  star.omega = target.omega_star;
  double acc = 0.0;
  for (std::size_t i = 0; i < 30; ++i) {
    const double d = stkrr::predict_at(est, p.spec, p.design, p.design[i]) -
                     stkrr::predict_at(star, p.spec, p.design, p.design[i]);
    acc += d * d;
  }
  EXPECT_NEAR(stkrr::empirical_mse(est.fitted_u, target.u_star), acc / 30.0, 1e-8);
}

TEST(RunningStats, MergeMatchesSequential) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> normal(3.0, 2.0);
  stkrr::RunningStats all, a, b;
  for (int i = 0; i < 1000; ++i) {
    const double x = normal(rng);
    all.add(x);
    (i < 300 ? a : b).add(x);
  }
  a.merge(b);
  EXPECT_EQ(a.count, all.count);
  EXPECT_NEAR(a.mean, all.mean, 1e-12);
  EXPECT_NEAR(a.sample_variance(), all.sample_variance(), 1e-10);
}

TEST(RunReplications, NoNoiseFixedTargetIsDeterministic) {
  const auto p = sobolev_problem(40);
  auto c = base_config(40, 0.0);
  c.lambda_grid = {1e-3, 1e-2};
  c.r_values = {3, 40};
  c.replications = 20;
  const auto report = stkrr::run_replications(c, p.system, p.k);
  const auto target = stkrr::sample_ball_target(p.system, p.k, c.base_seed);
  for (const auto& row : report.rows) {
    EXPECT_EQ(row.reps, 20u);
    EXPECT_LT(row.stderr_mse, 1e-15);
    EXPECT_NEAR(row.mean_mse, stkrr::approximation_error(p.system, row.r, row.lambda, target), 1e-14);
  }
}

TEST(RunReplications, RowOrderAndSeeds) {
  const auto p = sobolev_problem(20);
  auto c = base_config(20, 1.0);
  c.lambda_grid = {0.1, 0.01};
  c.r_values = {5, 2};
  c.replications = 3;
  c.base_seed = 99;
  const auto report = stkrr::run_replications(c, p.system, p.k);
  ASSERT_EQ(report.rows.size(), 4u);
  EXPECT_EQ(report.rows[0].r, 5u);
  EXPECT_EQ(report.rows[0].lambda, 0.1);
  EXPECT_EQ(report.rows[1].lambda, 0.01);
  EXPECT_EQ(report.rows[2].r, 2u);
  ASSERT_EQ(report.replication_seeds.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(report.replication_seeds[k], stkrr::split_seed(99, k));
}

TEST(RunReplications, InvalidConfig) {
  const auto p = sobolev_problem(10);
  auto c = base_config(10, 1.0);
  c.lambda_grid = {0.1};
  c.r_values = {3};
  c.replications = 0;
  EXPECT_THROW((void)stkrr::run_replications(c, p.system, p.k), stkrr::ArgumentError);
  c.replications = 1;
  c.r_values = {11};
  EXPECT_THROW((void)stkrr::run_replications(c, p.system, p.k), stkrr::ArgumentError);
  c.r_values = {3};
  c.lambda_grid = {};
  EXPECT_THROW((void)stkrr::run_replications(c, p.system, p.k), stkrr::ArgumentError);
  c.lambda_grid = {0.1};
  c.n = 12;
  EXPECT_THROW((void)stkrr::run_replications(c, p.system, p.k), stkrr::ArgumentError);
}

TEST(RunReplications, Reproducible) {
  const auto p = sobolev_problem(30);
  auto c = base_config(30, 2.0);
  c.lambda_grid = {1e-3, 1e-2, 1e-1};
  c.r_values = {3, 30};
  c.replications = 50;
  c.base_seed = 5;
  for (const auto mode : {stkrr::TargetMode::FixedAcrossReplications, stkrr::TargetMode::FreshPerReplication}) {
    c.target_mode = mode;
    const auto a = stkrr::run_replications(c, p.system, p.k);
    const auto b = stkrr::run_replications(c, p.system, p.k);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      EXPECT_EQ(a.rows[i].mean_mse, b.rows[i].mean_mse);
      EXPECT_EQ(a.rows[i].stderr_mse, b.rows[i].stderr_mse);
    }
  }
}

// One replication, checked against an explicit fit on the same noise draw.
TEST(RunReplications, MatchesExplicitFit) {
  const std::size_t n = 25;
  const auto p = sobolev_problem(n);
  auto c = base_config(n, 1.5);
  c.lambda_grid = {0.004};
  c.r_values = {4};
  c.replications = 1;
  c.base_seed = 17;
  c.target_mode = stkrr::TargetMode::FreshPerReplication;
  const auto report = stkrr::run_replications(c, p.system, p.k);

  const std::uint64_t seed = stkrr::split_seed(17, 0);
  const auto target = stkrr::sample_ball_target(p.system, p.k, stkrr::split_seed(seed, 0));
  auto engine = stkrr::make_engine(seed);
  const Eigen::VectorXd w = stkrr::draw_noise(stkrr::NoiseDistribution::Gaussian, 1.5, n, engine);
  const Eigen::VectorXd y = std::sqrt(static_cast<double>(n)) * target.u_star + w;
  const auto est = stkrr::fit(p.system, 4, 0.004, y);
  EXPECT_NEAR(report.rows[0].mean_mse, stkrr::empirical_mse(est.fitted_u, target.u_star), 1e-12);
}

TEST(RunReplications, BiasVarianceDecomposition) {
  const std::size_t n = 50;
  const auto p = sobolev_problem(n);
  auto c = base_config(n, 1.0);
  c.lambda_grid = {0.01};
  c.r_values = {5};
  c.replications = 10000;
  c.base_seed = 2024;
  const auto report = stkrr::run_replications(c, p.system, p.k);
  const auto target = stkrr::sample_ball_target(p.system, p.k, c.base_seed);
  const double expected = stkrr::approximation_error(p.system, 5, 0.01, target) +
                          stkrr::estimation_error(p.system.spectrum(), 5, 0.01, NoiseModel(1.0, n));
  const auto& row = report.rows[0];
  EXPECT_LE(std::abs(row.mean_mse - expected), 3.0 * row.stderr_mse);
}

TEST(RunReplications, RowsBelowTheoreticalMaximum) {
  const auto p = sobolev_problem(100);
  const auto& s = p.system.spectrum();
  auto c = base_config(100, 2.0);
  c.lambda_grid = stkrr::log_grid(1e-5 * s.largest(), s.largest(), 8);
  c.r_values = {3, 20, 100};
  c.replications = 300;
  c.target_mode = stkrr::TargetMode::FreshPerReplication;
  for (const auto dist : {stkrr::NoiseDistribution::Gaussian, stkrr::NoiseDistribution::Rademacher,
                          stkrr::NoiseDistribution::UniformSphere}) {
    c.noise_dist = dist;
    for (const auto& row : stkrr::run_replications(c, p.system, p.k).rows) {
      EXPECT_LE(row.mean_mse, row.theory_max_mse + 3.0 * row.stderr_mse);
    }
  }
}

TEST(RunReplications, SobolevTruncatedMinimumNotAboveFull) {
  const auto p = sobolev_problem(200);
  const auto& s = p.system.spectrum();
  auto c = base_config(200, 2.0);
  c.lambda_grid = stkrr::log_grid(1e-4 * s.largest(), s.largest(), 30);
  c.r_values = {3, 200};
  c.replications = 1000;
  const auto report = stkrr::run_replications(c, p.system, p.k);
  double best_truncated = std::numeric_limits<double>::infinity();
  double best_full = best_truncated;
  for (const auto& row : report.rows) {
    double& slot = row.r == 3 ? best_truncated : best_full;
    slot = std::min(slot, row.mean_mse);
  }
  EXPECT_LE(best_truncated, best_full);
}

TEST(Probe, NeverExceedsMaximum) {
  const auto p = sobolev_problem(60);
  const NoiseModel noise(4.0, 60);
  for (const double lambda : {1e-4, 1e-2, 0.1}) {
    for (const std::size_t r : {1u, 3u, 60u}) {
      const double probe = stkrr::max_over_ball_probe(p.system, p.k, lambda, r, noise, 200, 3);
      EXPECT_LE(probe, stkrr::max_mse(p.system.spectrum(), r, lambda, noise).max_mse);
    }
  }
  EXPECT_THROW((void)stkrr::max_over_ball_probe(p.system, p.k, 0.1, 3, noise, 0, 3), stkrr::ArgumentError);
}

TEST(Probe, SingleTarget) {
  const auto p = sobolev_problem(20);
  const NoiseModel noise(1.0, 20);
  const auto target = stkrr::sample_ball_target(p.system, p.k, stkrr::split_seed(8, 0));
  const double probe = stkrr::max_over_ball_probe(p.system, p.k, 0.01, 4, noise, 1, 8);
  EXPECT_DOUBLE_EQ(probe, stkrr::approximation_error(p.system, 4, 0.01, target) +
                              stkrr::estimation_error(p.system.spectrum(), 4, 0.01, noise));
}

TEST(Probe, ExplicitMaximizerAttainsMaximum) {
  const std::size_t n = 40;
  const auto p = sobolev_problem(n);
  const auto& s = p.system.spectrum();
  const NoiseModel noise(4.0, n);
  for (const double lambda : {1e-4, 3e-3, 0.05, 1.0}) {
    for (const std::size_t r : {1u, 2u, 5u, 39u}) {
      // Argmax of the diagonal: retained index with largest h, or index r+1.
      std::size_t k = r;
      double best = s.next(r);
      for (std::size_t i = 0; i < r; ++i) {
        if (stkrr::h(lambda, s[i]) > best) {
          best = stkrr::h(lambda, s[i]);
          k = i;
        }
      }
      Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
      v[static_cast<Eigen::Index>(k)] = std::sqrt(s[k]);
      const std::vector<stkrr::TargetFunction> targets{stkrr::target_from_spectral(p.system, p.k, v)};
      EXPECT_NEAR(targets[0].hilbert_norm_sq, 1.0, 1e-8);
      const double probe = stkrr::max_over_targets(p.system, lambda, r, noise, targets);
      EXPECT_NEAR(probe, stkrr::max_mse(s, r, lambda, noise).max_mse, 1e-10);
    }
  }
}

TEST(Noise, IsotropicForEverySupportedDistribution) {
  const std::size_t dim = 4;
  const int draws = 100000;
  const double sigma = 1.7;
  for (const auto dist : {stkrr::NoiseDistribution::Gaussian, stkrr::NoiseDistribution::Rademacher,
                          stkrr::NoiseDistribution::UniformSphere}) {
    auto engine = stkrr::make_engine(123);
    std::vector<stkrr::RunningStats> var(dim), cross(dim * dim);
    for (int t = 0; t < draws; ++t) {
      const Eigen::VectorXd w = stkrr::draw_noise(dist, sigma, dim, engine);
      for (std::size_t i = 0; i < dim; ++i) {
        var[i].add(w[static_cast<Eigen::Index>(i)] * w[static_cast<Eigen::Index>(i)]);
        for (std::size_t j = i + 1; j < dim; ++j) {
          cross[i * dim + j].add(w[static_cast<Eigen::Index>(i)] * w[static_cast<Eigen::Index>(j)]);
        }
      }
    }
    for (std::size_t i = 0; i < dim; ++i) {
      EXPECT_NEAR(var[i].mean, sigma * sigma, 0.05 * sigma * sigma);
      for (std::size_t j = i + 1; j < dim; ++j) {
        const auto& c = cross[i * dim + j];
        EXPECT_LE(std::abs(c.mean), 3.0 * c.standard_error());
      }
    }
  }
}

}  // namespace
