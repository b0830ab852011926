#pragma once

// JSON run configuration: operator, coefficients, sim and study sections.
// Unknown keys are rejected; errors carry the JSON pointer of the key.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvlevy/coefficients.hpp"
#include "mvlevy/multiscale.hpp"
#include "mvlevy/solver.hpp"
#include "mvlevy/spectral.hpp"

namespace mvlevy {

struct SimSection {
  double T = 1.0;
  double h = 1.0 / 256.0;
  double h_fast = 1.0 / 16.0;  // fast step as a fraction of epsilon
  std::size_t M = 1000;
  std::uint64_t seed = 0;
  std::vector<double> xi;   // zero-padded to n_modes
  std::vector<double> eta;  // zero-padded to n_modes

  friend bool operator==(const SimSection&, const SimSection&) = default;
};

struct StudySection {
  std::string kind = "rate-study";
  std::vector<double> grid;
  double m = 1.0;
  double lambda_weight = 0.0;  // 0 selects 4 lip_C
  std::string out_dir = "out";
  std::size_t n_iters = 8;
  double epsilon = 1.0 / 64.0;  // fixed epsilon of the Hoelder and auxiliary-gap studies
  std::size_t n_replicas = 4096;
  std::string fbar_mode = "stable_quadrature";

  friend bool operator==(const StudySection&, const StudySection&) = default;
};

struct RunConfig {
  OperatorSpec op;
  BuiltinFamily coeffs;
  SimSection sim;
  StudySection study;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Throws ConfigError with the pointer of the first offending key.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

/// SHA-256 (first 16 hex digits) of the canonical JSON with study.out_dir
/// removed, so the output location does not change the identity of a run.
std::string config_hash(const RunConfig& cfg);

CoefficientSet make_coefficients(const RunConfig& cfg);
SimConfig make_sim_config(const RunConfig& cfg, int threads = 0);
MultiscaleConfig make_multiscale_config(const RunConfig& cfg, double epsilon, int threads = 0);

}  // namespace mvlevy
