#pragma once

#include <charconv>
#include <cstddef>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "stkrr/error.hpp"
#include "stkrr/rates.hpp"
#include "stkrr/selection.hpp"
#include "stkrr/simulate.hpp"
#include "stkrr/spectral.hpp"

namespace stkrr {

inline constexpr int kSchemaVersion = 1;

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ArgumentError("bad numeric field '" + s + "'");
  return v;
}

// CSV ------------------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  [[nodiscard]] std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw ArgumentError("CSV has no column '" + name + "'");
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

/// Reads a numeric CSV with one header line, as written by the writers below.
inline CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ArgumentError("CSV is empty");
  table.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != table.header.size()) throw ArgumentError("CSV row has wrong number of fields");
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f));
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline void write_spectrum_csv(std::ostream& out, const SpectrumOnly& spectrum) {
  out << "index,eigenvalue\n";
  for (std::size_t i = 0; i < spectrum.n(); ++i) out << (i + 1) << ',' << format_double(spectrum[i]) << '\n';
}

inline void write_curve_csv(std::ostream& out, const std::vector<RiskCurve>& curves) {
  out << "lambda,r,wae,ee,max_mse\n";
  for (const auto& curve : curves) {
    for (const auto& p : curve.points) {
      out << format_double(p.lambda) << ',' << p.r << ',' << format_double(p.wae) << ',' << format_double(p.ee) << ','
          << format_double(p.max_mse) << '\n';
    }
  }
}

inline void write_simulation_csv(std::ostream& out, const SimulationReport& report) {
  out << "lambda,r,mean_mse,stderr,reps,theory_max_mse\n";
  for (const auto& row : report.rows) {
    out << format_double(row.lambda) << ',' << row.r << ',' << format_double(row.mean_mse) << ','
        << format_double(row.stderr_mse) << ',' << row.reps << ',' << format_double(row.theory_max_mse) << '\n';
  }
}

inline void write_rates_csv(std::ostream& out, const RateFit& fit) {
  out << "gamma,lambda_star,min_risk\n";
  for (const auto& p : fit.points) {
    out << format_double(p.gamma) << ',' << format_double(p.lambda_star) << ',' << format_double(p.min_risk) << '\n';
  }
}

inline void write_truncation_csv(std::ostream& out, const TruncationReport& r) {
  out << "lambda_n,r_n,min_risk_full,min_risk_truncated,n,sigma2\n";
  out << format_double(r.lambda_n) << ',' << r.r_n << ',' << format_double(r.min_risk_full) << ','
      << format_double(r.min_risk_truncated) << ',' << r.n << ',' << format_double(r.sigma2) << '\n';
}

// JSON -----------------------------------------------------------------------

inline const char* to_string(KernelKind kind) { return kind == KernelKind::Gaussian ? "gaussian" : "sobolev1"; }

inline const char* to_string(DesignScheme scheme) {
  return scheme == DesignScheme::EquispacedClosed ? "closed" : "open-left";
}

inline const char* to_string(TargetMode mode) {
  return mode == TargetMode::FixedAcrossReplications ? "fixed" : "fresh";
}

inline const char* to_string(NoiseDistribution dist) {
  switch (dist) {
    case NoiseDistribution::Gaussian:
      return "gaussian";
    case NoiseDistribution::Rademacher:
      return "rademacher";
    case NoiseDistribution::UniformSphere:
      return "sphere";
  }
  return "gaussian";
}

inline const char* to_string(DecayKind kind) { return kind == DecayKind::Polynomial ? "poly" : "exp"; }

inline nlohmann::json kernel_json(const KernelSpec& spec) {
  nlohmann::json j{{"kind", to_string(spec.kind())}, {"domain", {spec.domain().lo, spec.domain().hi}}};
  if (spec.kind() == KernelKind::Gaussian) j["bandwidth"] = spec.bandwidth();
  return j;
}

inline nlohmann::json to_json(const TruncationReport& r) {
  nlohmann::json table = nlohmann::json::array();
  for (const auto& [lambda, rl] : r.r_of_lambda_table) table.push_back({{"lambda", lambda}, {"r", rl}});
  return {
      {"schema_version", kSchemaVersion},
      {"n", r.n},
      {"sigma2", r.sigma2},
      {"lambda_n", r.lambda_n},
      {"r_n", r.r_n},
      {"min_risk_full", r.min_risk_full},
      {"min_risk_truncated", r.min_risk_truncated},
      {"lambda_truncated", r.lambda_truncated},
      {"lambda_bracket", {r.bracket_lo, r.bracket_hi}},
      {"boundary", r.boundary},
      {"r_of_lambda", std::move(table)},
  };
}

inline nlohmann::json to_json(const RiskCurve& curve) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : curve.points) {
    points.push_back({{"lambda", p.lambda}, {"wae", p.wae}, {"ee", p.ee}, {"max_mse", p.max_mse}});
  }
  return {{"r", curve.r},
          {"argmin_lambda", curve.argmin_lambda},
          {"min_risk", curve.min_risk},
          {"boundary", curve.boundary},
          {"points", std::move(points)}};
}

inline nlohmann::json to_json(const SimulationConfig& c) {
  return {{"kernel", kernel_json(c.kernel)},
          {"design", to_string(c.scheme)},
          {"n", c.n},
          {"sigma", c.sigma},
          {"lambda_grid", c.lambda_grid},
          {"r_values", c.r_values},
          {"replications", c.replications},
          {"base_seed", c.base_seed},
          {"target_mode", to_string(c.target_mode)},
          {"noise", to_string(c.noise_dist)}};
}

/// Sidecar written next to the simulation CSV.
inline nlohmann::json simulation_sidecar(const SimulationReport& report) {
  return {{"schema_version", kSchemaVersion},
          {"config", to_json(report.config)},
          {"base_seed", report.config.base_seed},
          {"seed_rule", "replication k: splitmix64(base_seed + (k+1) * 0x9e3779b97f4a7c15)"},
          {"replication_seeds", report.replication_seeds}};
}

inline nlohmann::json to_json(const SimulationReport& report) {
  nlohmann::json j = simulation_sidecar(report);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"lambda", row.lambda},
                    {"r", row.r},
                    {"mean_mse", row.mean_mse},
                    {"stderr", row.stderr_mse},
                    {"reps", row.reps},
                    {"theory_max_mse", row.theory_max_mse}});
  }
  j["rows"] = std::move(rows);
  return j;
}

inline nlohmann::json to_json(const RateFit& fit) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : fit.points) {
    points.push_back({{"gamma", p.gamma}, {"lambda_star", p.lambda_star}, {"min_risk", p.min_risk}});
  }
  return {{"schema_version", kSchemaVersion},
          {"decay", to_string(fit.kind)},
          {"slope", fit.slope},
          {"intercept", fit.intercept},
          {"r_squared", fit.r_squared},
          {"lambda_slope", fit.lambda_slope},
          {"reliable", fit.reliable},
          {"points", std::move(points)}};
}

inline nlohmann::json spectrum_json(const SpectrumOnly& spectrum) {
  std::vector<double> mu(spectrum.values().data(), spectrum.values().data() + spectrum.values().size());
  return {{"schema_version", kSchemaVersion}, {"n", spectrum.n()}, {"eigenvalues", std::move(mu)}};
}

}  // namespace stkrr
