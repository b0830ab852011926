#pragma once

// Batch studies, slope fits and persistence of results.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvlevy/multiscale.hpp"
#include "mvlevy/solver.hpp"

namespace mvlevy {

struct GridPoint {
  double param = 0.0;
  double error = 0.0;
  double std_error = 0.0;
  bool floor_flag = false;  // within 3 standard errors of the zero baseline

  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

struct ExperimentResult {
  std::string kind;
  std::vector<GridPoint> grid;
  std::optional<double> fitted_slope;
  std::optional<double> fit_r2;
  std::optional<double> slope_stderr;
  std::optional<double> theoretical_slope;
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  double runtime_s = 0.0;
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::string> flags;
  nlohmann::json metrics = nlohmann::json::object();

  friend bool operator==(const ExperimentResult&, const ExperimentResult&) = default;
};

/// Weighted log-log fit of error against param over points without the
/// floor flag (weights 1 / var(log error)). Needs 3 points; otherwise the
/// slope stays empty and the result is flagged "degenerate".
void fit_loglog(ExperimentResult& result);

/// Slope after removing the point with the largest relative standard error;
/// empty when fewer than 4 usable points.
std::optional<double> slope_without_noisiest(const ExperimentResult& result);

/// Strong error per epsilon with delta = epsilon^{1/(1+theta)} and
/// h_fast = h_fast_ratio * epsilon. Grid point i runs on replica
/// base.replica + i. Expected slope theta / (2 (1 + theta)).
ExperimentResult rate_study(const MultiscaleConfig& tmpl, const AveragedDrift& drift, std::span<const double> eps_grid,
                            double m, double h_fast_ratio);

/// (1/T) int_0^T [E|X_t - X_{t(delta)}|^m]^{1/m} dt per delta from one
/// slow-fast run recorded on the macro grid. Expected slope theta / 2.
ExperimentResult hoelder_study(const MultiscaleConfig& cfg, std::span<const double> delta_grid, double m = 1.0);

/// (1/T) int_0^T [E|Y_t - Yhat_t|^m]^{1/m} dt per delta; Yhat is the
/// auxiliary process. Expected slope theta / 2.
ExperimentResult auxiliary_gap_study(const MultiscaleConfig& cfg, std::span<const double> delta_grid, double m = 1.0);

/// ergodicity_decay per input; grid rows are (input index, fitted rate,
/// rate stderr) and the expected value is the gap lambda_1 - L_G.
ExperimentResult ergodicity_study(std::span<const FrozenInput> inputs, const OperatorSpec& spec,
                                  const CoefficientSet& coeffs, std::span<const double> t_grid,
                                  std::size_t n_replicas, std::uint64_t seed, double h = 1.0 / 64.0, int threads = 0);

/// Picard iteration; grid rows are (n, d_n, 0).
ExperimentResult picard_study(const SimConfig& cfg, std::size_t n_iters, double lambda_weight);

/// simulate_mkv; grid rows are (t, m-th moment, Monte Carlo stderr).
ExperimentResult simulate_study(const SimConfig& cfg, double m);

/// Writes <out_dir>/<kind>/<config_hash>/{result.csv, meta.json, loglog.dat,
/// run_info.json, manifest.json} and returns the manifest path. Only
/// run_info.json carries volatile data (runtime, timestamp).
std::filesystem::path persist(const ExperimentResult& result, const std::filesystem::path& out_dir);

/// Reads a directory written by persist.
ExperimentResult load_result(const std::filesystem::path& dir);

}  // namespace mvlevy
