#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "stkrr/io.hpp"

namespace {

TEST(FormatDouble, RoundTrips) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> exponent(-300.0, 300.0);
  std::uniform_real_distribution<double> mantissa(-1.0, 1.0);
  for (int t = 0; t < 10000; ++t) {
    const double v = mantissa(rng) * std::pow(10.0, exponent(rng));
    EXPECT_EQ(stkrr::parse_double(stkrr::format_double(v)), v);
  }
  EXPECT_EQ(stkrr::format_double(0.5), "0.5");
  EXPECT_EQ(stkrr::format_double(3.0), "3");
}

TEST(ParseDouble, RejectsGarbage) {
  EXPECT_THROW((void)stkrr::parse_double(""), stkrr::ArgumentError);
  EXPECT_THROW((void)stkrr::parse_double("1.5x"), stkrr::ArgumentError);
  EXPECT_THROW((void)stkrr::parse_double("abc"), stkrr::ArgumentError);
}

TEST(Csv, SplitKeepsEmptyFields) {
  EXPECT_EQ(stkrr::split_csv_line("a,b"), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(stkrr::split_csv_line("a,,b"), (std::vector<std::string>{"a", "", "b"}));
  EXPECT_EQ(stkrr::split_csv_line("a,"), (std::vector<std::string>{"a", ""}));
}

TEST(Csv, CurveRoundTrip) {
  const stkrr::SpectrumOnly s(std::vector<double>{1.0, 0.3, 0.01, 1e-5});
  const stkrr::NoiseModel noise(4.0, 4);
  const auto grid = stkrr::log_grid(1e-6, 10.0, 37);
  std::vector<stkrr::RiskCurve> curves{stkrr::risk_curve(s, 2, grid, noise), stkrr::risk_curve(s, 4, grid, noise)};
  std::stringstream buf;
  stkrr::write_curve_csv(buf, curves);
  const auto table = stkrr::read_csv(buf);
  EXPECT_EQ(table.header, (std::vector<std::string>{"lambda", "r", "wae", "ee", "max_mse"}));
  ASSERT_EQ(table.rows.size(), 74u);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& p = curves[i / 37].points[i % 37];
    EXPECT_EQ(table.rows[i][table.column("lambda")], p.lambda);
    EXPECT_EQ(table.rows[i][table.column("r")], static_cast<double>(p.r));
    EXPECT_EQ(table.rows[i][table.column("wae")], p.wae);
    EXPECT_EQ(table.rows[i][table.column("ee")], p.ee);
    EXPECT_EQ(table.rows[i][table.column("max_mse")], p.max_mse);
  }
}

TEST(Csv, SpectrumAndTruncationHeaders) {
  std::stringstream a;
  stkrr::write_spectrum_csv(a, stkrr::SpectrumOnly(std::vector<double>{2.0, 1.0}));
  EXPECT_EQ(a.str(), "index,eigenvalue\n1,2\n2,1\n");

  stkrr::TruncationReport report;
  report.lambda_n = 0.5;
  report.r_n = 3;
  report.n = 200;
  report.sigma2 = 4.0;
  std::stringstream b;
  stkrr::write_truncation_csv(b, report);
  const auto table = stkrr::read_csv(b);
  EXPECT_EQ(table.header,
            (std::vector<std::string>{"lambda_n", "r_n", "min_risk_full", "min_risk_truncated", "n", "sigma2"}));
  EXPECT_EQ(table.rows.at(0)[1], 3.0);
}

TEST(Csv, ReadErrors) {
  std::stringstream empty;
  EXPECT_THROW((void)stkrr::read_csv(empty), stkrr::ArgumentError);
  std::stringstream ragged("a,b\n1,2,3\n");
  EXPECT_THROW((void)stkrr::read_csv(ragged), stkrr::ArgumentError);
  std::stringstream bad("a\nx\n");
  EXPECT_THROW((void)stkrr::read_csv(bad), stkrr::ArgumentError);
  std::stringstream ok("a\n1\n");
  EXPECT_THROW((void)stkrr::read_csv(ok).column("b"), stkrr::ArgumentError);
}

TEST(Json, TruncationReportKeys) {
  stkrr::TruncationReport report;
  report.r_of_lambda_table = {{0.1, 2}};
  const auto j = stkrr::to_json(report);
  for (const char* key : {"schema_version", "lambda_n", "r_n", "min_risk_full", "min_risk_truncated", "n", "sigma2",
                          "r_of_lambda", "lambda_bracket", "boundary"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["schema_version"], stkrr::kSchemaVersion);
  EXPECT_EQ(j["r_of_lambda"][0]["r"], 2);
}

TEST(Json, SimulationSidecar) {
  stkrr::SimulationReport report;
  report.config.base_seed = 42;
  report.replication_seeds = {stkrr::split_seed(42, 0)};
  const auto j = stkrr::simulation_sidecar(report);
  EXPECT_EQ(j["base_seed"], 42u);
  EXPECT_EQ(j["config"]["kernel"]["kind"], "sobolev1");
  EXPECT_EQ(j["replication_seeds"][0], stkrr::split_seed(42, 0));
}

}  // namespace
