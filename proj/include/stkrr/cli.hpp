#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stkrr/estimator.hpp"
#include "stkrr/io.hpp"
#include "stkrr/kernel.hpp"
#include "stkrr/rates.hpp"
#include "stkrr/risk.hpp"
#include "stkrr/selection.hpp"
#include "stkrr/simulate.hpp"
#include "stkrr/spectral.hpp"

namespace stkrr::cli {

enum class Command { Spectrum, Curve, Optimal, Simulate, Rates };
enum class OutputFormat { Csv, Json };

/// Default output directory when --out is not given.
inline constexpr const char* kOutputDirEnv = "STKRR_OUTPUT_DIR";

struct RunConfig {
  Command command = Command::Optimal;

  KernelKind kernel = KernelKind::Sobolev1;
  double bandwidth = 0.1;
  Interval domain{0.0, 1.0};
  DesignScheme scheme = DesignScheme::EquispacedOpenLeft;
  std::size_t n = 200;

  double sigma = 2.0;
  double radius = 1.0;

  std::vector<std::size_t> r_values;
  std::vector<double> lambdas;
  SearchConfig search;

  std::size_t reps = 1000;
  std::uint64_t seed = 0;
  TargetMode target_mode = TargetMode::FixedAcrossReplications;
  NoiseDistribution noise = NoiseDistribution::Gaussian;

  SyntheticDecay decay = SyntheticDecay::polynomial(1.0);
  std::vector<double> gammas;

  std::string out;
  OutputFormat format = OutputFormat::Csv;

  [[nodiscard]] KernelSpec kernel_spec() const {
    return kernel == KernelKind::Gaussian ? KernelSpec::gaussian(bandwidth, domain) : KernelSpec::sobolev1(domain);
  }
};

/// Either a validated config, or the text to print and the exit code
/// (0 for --help, 2 for bad arguments).
struct ParseResult {
  std::optional<RunConfig> config;
  int exit_code = 0;
  std::string message;
};

inline ParseResult parse_args(int argc, const char* const* argv) {
  CLI::App app{"Spectrally truncated kernel ridge regression: exact worst-case risk and truncation selection", "stkrr"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string kernel = "sobolev1";
  std::optional<double> domain_lo, domain_hi;
  std::optional<DesignScheme> scheme;
  std::size_t n = 200;
  std::size_t rates_n = 4096;
  std::optional<std::size_t> grid_points;
  std::string format;
  std::string decay = "poly";
  double alpha = 1.0;
  double c = 1.0;

  const std::map<std::string, DesignScheme> schemes{{"closed", DesignScheme::EquispacedClosed},
                                                    {"open-left", DesignScheme::EquispacedOpenLeft}};
  const std::map<std::string, TargetMode> targets{{"fixed", TargetMode::FixedAcrossReplications},
                                                  {"fresh", TargetMode::FreshPerReplication}};
  const std::map<std::string, NoiseDistribution> noises{{"gaussian", NoiseDistribution::Gaussian},
                                                        {"rademacher", NoiseDistribution::Rademacher},
                                                        {"sphere", NoiseDistribution::UniformSphere}};

  const auto add_output = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "Output file (default: $" + std::string(kOutputDirEnv) + "/<command>.<ext>, else stdout)");
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  };
  const auto add_kernel = [&](CLI::App* sub) {
    sub->add_option("--kernel", kernel, "Kernel: sobolev1 or gaussian")->check(CLI::IsMember({"sobolev1", "gaussian"}));
    sub->add_option("--bandwidth", cfg.bandwidth, "Gaussian bandwidth b")->check(CLI::PositiveNumber);
    sub->add_option("--domain-lo", domain_lo, "Domain lower end (default 0 for sobolev1, -1 for gaussian)");
    sub->add_option("--domain-hi", domain_hi, "Domain upper end (default 1)");
    sub->add_option("--design", scheme, "Design grid: closed or open-left")->transform(CLI::CheckedTransformer(schemes));
    sub->add_option("--n", n, "Number of design points")->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
  };
  const auto add_noise = [&](CLI::App* sub) {
    sub->add_option("--sigma", cfg.sigma, "Noise standard deviation")->check(CLI::NonNegativeNumber);
  };
  const auto add_search = [&](CLI::App* sub) {
    sub->add_option("--lambda-min-factor", cfg.search.lower_factor, "Grid lower end as a multiple of mu_1")
        ->check(CLI::PositiveNumber);
    sub->add_option("--lambda-max-factor", cfg.search.upper_factor, "Grid upper end as a multiple of mu_1")
        ->check(CLI::PositiveNumber);
    sub->add_option("--grid-points", grid_points, "Number of log-spaced lambda grid points")
        ->check(CLI::Range(std::size_t{1}, std::size_t{10000000}));
  };

  auto* spectrum = app.add_subcommand("spectrum", "Write the kernel-matrix eigenvalues");
  add_kernel(spectrum);
  add_output(spectrum);

  auto* curve = app.add_subcommand("curve", "Write exact maximum-risk curves for one or more truncation levels");
  add_kernel(curve);
  add_noise(curve);
  add_search(curve);
  add_output(curve);
  curve->add_option("--r", cfg.r_values, "Truncation level (repeatable, default n)")->check(CLI::PositiveNumber);
  curve->add_option("--lambda", cfg.lambdas, "Explicit lambda value (repeatable; overrides the grid)")
      ->check(CLI::PositiveNumber);
  curve->add_option("--radius", cfg.radius, "Hilbert-ball radius")->check(CLI::PositiveNumber);

  auto* optimal = app.add_subcommand("optimal", "Compute lambda_n, r_n and the truncated minimum risk");
  add_kernel(optimal);
  add_noise(optimal);
  add_search(optimal);
  add_output(optimal);

  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo empirical MSE against the exact maximum risk");
  add_kernel(simulate);
  add_noise(simulate);
  add_search(simulate);
  add_output(simulate);
  simulate->add_option("--r", cfg.r_values, "Truncation level (repeatable, default r_n and n)")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--lambda", cfg.lambdas, "Explicit lambda value (repeatable; overrides the grid)")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--reps", cfg.reps, "Replications")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", cfg.seed, "Base seed");
  simulate->add_option("--target", cfg.target_mode, "Target mode: fixed or fresh")
      ->transform(CLI::CheckedTransformer(targets));
  simulate->add_option("--noise", cfg.noise, "Noise: gaussian, rademacher or sphere")
      ->transform(CLI::CheckedTransformer(noises));

  auto* rates = app.add_subcommand("rates", "Fit the risk exponent on synthetic spectra over a gamma sweep");
  add_output(rates);
  add_search(rates);
  rates->add_option("--decay", decay, "Decay class: poly or exp")->check(CLI::IsMember({"poly", "exp"}));
  rates->add_option("--alpha", alpha, "Polynomial smoothness alpha")->check(CLI::PositiveNumber);
  rates->add_option("--c", c, "Exponential decay constant c")->check(CLI::PositiveNumber);
  rates->add_option("--n", rates_n, "Spectrum length")->check(CLI::PositiveNumber);
  rates->add_option("--gamma", cfg.gammas, "gamma = sigma^2/n value (repeatable, default 2^-6..2^-20)")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream out, err;
    const int code = app.exit(e, out, err);
    return {std::nullopt, code == 0 ? 0 : 2, out.str() + err.str()};
  }

  if (spectrum->parsed()) cfg.command = Command::Spectrum;
  if (curve->parsed()) cfg.command = Command::Curve;
  if (optimal->parsed()) cfg.command = Command::Optimal;
  if (simulate->parsed()) cfg.command = Command::Simulate;
  if (rates->parsed()) cfg.command = Command::Rates;

  cfg.kernel = kernel == "gaussian" ? KernelKind::Gaussian : KernelKind::Sobolev1;
  cfg.domain = cfg.kernel == KernelKind::Gaussian ? Interval{-1.0, 1.0} : Interval{0.0, 1.0};
  if (domain_lo) cfg.domain.lo = *domain_lo;
  if (domain_hi) cfg.domain.hi = *domain_hi;
  cfg.scheme = scheme.value_or(cfg.kernel == KernelKind::Gaussian ? DesignScheme::EquispacedClosed
                                                                  : DesignScheme::EquispacedOpenLeft);
  cfg.n = cfg.command == Command::Rates ? rates_n : n;

  switch (cfg.command) {
    case Command::Curve:
      cfg.search.grid_points = grid_points.value_or(100);
      break;
    case Command::Simulate:
      cfg.search.grid_points = grid_points.value_or(30);
      break;
    default:
      cfg.search.grid_points = grid_points.value_or(400);
      break;
  }
  if (cfg.command == Command::Optimal || cfg.command == Command::Rates) {
    if (cfg.search.grid_points < 2) return {std::nullopt, 2, "--grid-points: lambda search needs at least 2 points\n"};
  }
  if (!(cfg.search.lower_factor < cfg.search.upper_factor)) {
    return {std::nullopt, 2, "--lambda-min-factor: must be smaller than --lambda-max-factor\n"};
  }

  if (format.empty()) {
    cfg.format = (cfg.command == Command::Optimal || cfg.command == Command::Rates) ? OutputFormat::Json
                                                                                    : OutputFormat::Csv;
  } else {
    cfg.format = format == "json" ? OutputFormat::Json : OutputFormat::Csv;
  }

  cfg.decay = decay == "exp" ? SyntheticDecay::exponential(c) : SyntheticDecay::polynomial(alpha);

  if (cfg.command != Command::Rates) {
    try {
      (void)cfg.kernel_spec();
    } catch (const ArgumentError& e) {
      return {std::nullopt, 2, std::string("--domain-lo/--domain-hi/--bandwidth: ") + e.what() + "\n"};
    }
    for (const std::size_t r : cfg.r_values) {
      if (r > cfg.n) return {std::nullopt, 2, "--r: truncation level " + std::to_string(r) + " exceeds --n\n"};
    }
  }
  if (cfg.command == Command::Rates && !cfg.gammas.empty() && cfg.gammas.size() < 4) {
    return {std::nullopt, 2, "--gamma: rate fit needs at least four values\n"};
  }
  return {cfg, 0, {}};
}

namespace detail {

struct Artifact {
  std::string path;  // empty: standard output
  std::string content;
};

inline std::string extension(OutputFormat f) { return f == OutputFormat::Json ? ".json" : ".csv"; }

inline const char* command_name(Command c) {
  switch (c) {
    case Command::Spectrum:
      return "spectrum";
    case Command::Curve:
      return "curve";
    case Command::Optimal:
      return "optimal";
    case Command::Simulate:
      return "simulate";
    case Command::Rates:
      return "rates";
  }
  return "output";
}

inline std::string resolve_output(const RunConfig& cfg) {
  if (!cfg.out.empty()) return cfg.out;
  if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') {
    return (std::filesystem::path(dir) / (std::string(command_name(cfg.command)) + extension(cfg.format))).string();
  }
  return {};
}

inline std::vector<double> lambda_values(const RunConfig& cfg, const SpectrumOnly& spectrum) {
  if (!cfg.lambdas.empty()) {
    std::vector<double> v = cfg.lambdas;
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  }
  const double mu1 = spectrum.largest();
  if (!(mu1 > 0.0)) throw DegenerateError("all-zero spectrum");
  return log_grid(cfg.search.lower_factor * mu1, cfg.search.upper_factor * mu1, cfg.search.grid_points);
}

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

/// Builds every artifact in memory before anything is written.
inline std::vector<Artifact> build_artifacts(const RunConfig& cfg) {
  const std::string path = resolve_output(cfg);
  std::ostringstream body;
  std::vector<Artifact> artifacts;

  if (cfg.command == Command::Rates) {
    const RateFit fit = rate_fit(cfg.decay, cfg.n, cfg.gammas.empty() ? default_gamma_sweep() : cfg.gammas, cfg.search);
    if (cfg.format == OutputFormat::Json) {
      nlohmann::json j = to_json(fit);
      j["parameter"] = cfg.decay.parameter;
      j["n"] = cfg.n;
      j["target_exponent"] =
          cfg.decay.kind == DecayKind::Polynomial ? polynomial_rate_exponent(cfg.decay.parameter) : 1.0;
      body << dump(j);
    } else {
      write_rates_csv(body, fit);
    }
    artifacts.push_back({path, body.str()});
    return artifacts;
  }

  const KernelSpec spec = cfg.kernel_spec();
  const DesignPoints design = make_design(spec, cfg.n, cfg.scheme);
  const KernelMatrix k = kernel_matrix(spec, design);
  const EigenSystem system = eigendecompose(k);
  const SpectrumOnly& mu = system.spectrum();
  const NoiseModel noise(cfg.sigma * cfg.sigma, cfg.n);

  switch (cfg.command) {
    case Command::Spectrum:
      if (cfg.format == OutputFormat::Json) {
        nlohmann::json j = spectrum_json(mu);
        j["kernel"] = kernel_json(spec);
        body << dump(j);
      } else {
        write_spectrum_csv(body, mu);
      }
      break;

    case Command::Curve: {
      std::vector<std::size_t> rs = cfg.r_values.empty() ? std::vector<std::size_t>{cfg.n} : cfg.r_values;
      const auto grid = lambda_values(cfg, mu);
      std::vector<RiskCurve> curves;
      for (const std::size_t r : rs) curves.push_back(risk_curve(mu, r, grid, noise, cfg.radius));
      if (cfg.format == OutputFormat::Json) {
        nlohmann::json j{{"schema_version", kSchemaVersion}, {"n", cfg.n}, {"sigma2", noise.sigma2},
                         {"radius", cfg.radius}, {"curves", nlohmann::json::array()}};
        for (const auto& c : curves) j["curves"].push_back(to_json(c));
        body << dump(j);
      } else {
        write_curve_csv(body, curves);
      }
      break;
    }

    case Command::Optimal: {
      const TruncationReport report = optimal_truncation(mu, noise, cfg.search);
      if (cfg.format == OutputFormat::Json) {
        nlohmann::json j = to_json(report);
        j["kernel"] = kernel_json(spec);
        body << dump(j);
      } else {
        write_truncation_csv(body, report);
      }
      break;
    }

    case Command::Simulate: {
      SimulationConfig sim;
      sim.kernel = spec;
      sim.scheme = cfg.scheme;
      sim.n = cfg.n;
      sim.sigma = cfg.sigma;
      sim.lambda_grid = lambda_values(cfg, mu);
      sim.r_values = cfg.r_values;
      if (sim.r_values.empty()) {
        SearchConfig search = cfg.search;
        search.grid_points = 400;
        const std::size_t r_n = optimal_truncation(mu, noise, search).r_n;
        sim.r_values = r_n == cfg.n ? std::vector<std::size_t>{cfg.n} : std::vector<std::size_t>{r_n, cfg.n};
      }
      sim.replications = cfg.reps;
      sim.base_seed = cfg.seed;
      sim.target_mode = cfg.target_mode;
      sim.noise_dist = cfg.noise;
      const SimulationReport report = run_replications(sim, system, k);
      if (cfg.format == OutputFormat::Json) {
        body << dump(to_json(report));
      } else {
        write_simulation_csv(body, report);
        if (!path.empty()) {
          artifacts.push_back(
              {std::filesystem::path(path).replace_extension(".json").string(), dump(simulation_sidecar(report))});
        }
      }
      break;
    }

    case Command::Rates:
      break;
  }
  artifacts.insert(artifacts.begin(), Artifact{path, body.str()});
  return artifacts;
}

}  // namespace detail

/// Runs the command. Returns 0 iff every requested artifact was written; on
/// failure any file already written by this call is removed.
inline int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<detail::Artifact> artifacts;
  try {
    artifacts = detail::build_artifacts(cfg);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  std::vector<std::string> written;
  const auto rollback = [&written] {
    std::error_code ec;
    for (const auto& p : written) std::filesystem::remove(p, ec);
  };
  for (const auto& a : artifacts) {
    if (a.path.empty()) {
      out << a.content;
      if (!out) {
        err << "error: failed writing to standard output\n";
        rollback();
        return 1;
      }
      continue;
    }
    const std::string tmp = a.path + ".tmp";
    {
      std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
      file << a.content;
      file.close();
      if (!file) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        err << "error: cannot write " << a.path << '\n';
        rollback();
        return 1;
      }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, a.path, ec);
    if (ec) {
      std::filesystem::remove(tmp, ec);
      err << "error: cannot write " << a.path << '\n';
      rollback();
      return 1;
    }
    written.push_back(a.path);
  }
  return 0;
}

}  // namespace stkrr::cli
