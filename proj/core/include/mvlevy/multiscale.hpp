#pragma once

// Slow-fast system, Khasminskii auxiliary process, frozen equation, averaged
// drift and the synchronous-coupling strong error.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvlevy/coefficients.hpp"
#include "mvlevy/measure.hpp"
#include "mvlevy/solver.hpp"

namespace mvlevy {

struct MultiscaleConfig {
  SimConfig base;
  double epsilon = 1.0 / 64.0;
  double h_fast = 1.0 / 1024.0;  // absolute, in slow time units
  double delta = 0.0;            // 0 selects epsilon^{1/(1+theta)}
  SpectralField eta;             // empty means zero

  double block_length() const;
  SpectralField fast_initial() const;
  /// Fast steps per macro step h.
  std::size_t substeps() const;
  /// Fast steps per block delta (delta rounded to the fast grid).
  std::size_t block_steps() const;
};

/// Checks h_fast <= epsilon / 10, h_fast | h, delta aligned to the fast grid
/// with h_fast <= delta <= T, and the assumptions A1-A3, B1-B3.
/// Throws std::invalid_argument or AssumptionError.
void validate_multiscale(const MultiscaleConfig& cfg, bool require_b3_bound = true);

/// Which streams drove a run; an averaged run must match its partner.
struct StreamManifest {
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
  std::size_t particles = 0;
  std::size_t modes = 0;
  double h_fast = 0.0;
  std::uint64_t fast_steps = 0;
  std::uint32_t slow_channel = channel::slow;
  std::uint32_t fast_channel = channel::fast;

  friend bool operator==(const StreamManifest&, const StreamManifest&) = default;
};

nlohmann::json to_json(const StreamManifest& m);

/// Slow states and law statistics recorded every `stride` fast steps.
struct BlockSnapshots {
  std::size_t stride = 1;
  std::vector<EmpiricalMeasure> x;
  std::vector<double> mu_stat;
};

struct SlowFastOptions {
  bool record_fast = true;
  /// Record slow snapshots every this many fast steps (0: none).
  std::size_t snapshot_stride = 0;
};

struct SlowFastRun {
  PathEnsemble slow;  // on the macro grid t_j = j h
  PathEnsemble fast;  // empty unless record_fast
  StreamManifest manifest;
  std::optional<BlockSnapshots> snapshots;
};

/// Both components advance on the fast grid with exponential Euler; the fast
/// one uses rates lambda_k / epsilon and exact fast convolution increments.
/// The law argument of F and G is the slow ensemble's mu_stat, refreshed
/// once per macro step.
SlowFastRun simulate_slow_fast(const MultiscaleConfig& cfg, SlowFastOptions opts = {});

/// Khasminskii process: the fast equation with G's (x, mu) frozen at block
/// starts l delta, driven by the same fast streams as the paired run.
/// Starts from eta. Recorded on the macro grid.
PathEnsemble simulate_auxiliary(const MultiscaleConfig& cfg, const BlockSnapshots& snapshots);

struct FrozenInput {
  SpectralField x;
  double mu_stat = 0.0;
  SpectralField y0;
};

/// Frozen equation at scale 1: dY = (AY + G(x, mu, Y)) dt + dZ, n_replicas
/// independent copies from y0 recorded every `record_every` steps.
PathEnsemble simulate_frozen(const FrozenInput& input, double T_end, double h, std::size_t n_replicas,
                             const OperatorSpec& spec, const CoefficientSet& coeffs, std::uint64_t seed,
                             std::size_t record_every = 1, int threads = 0);

enum class FbarMode { analytic_linear, ergodic_estimate, stable_quadrature };

std::string to_string(FbarMode mode);
FbarMode parse_fbar_mode(const std::string& name);

struct ErgodicSettings {
  double burn_in = 0.0;  // 0 selects 8 / gap
  double window = 0.0;   // 0 selects 64 / gap
  double h = 1.0 / 32.0;
  std::size_t n_paths = 64;
  std::uint64_t seed = 0;
  double quantum = 1e-3;  // cache grid for (x, mu_stat)
  int threads = 0;
};

struct FbarEstimate {
  SpectralField value;
  SpectralField std_error;  // zero for the closed-form modes
};

/// The averaged drift F-bar(x, mu) = int F(x, mu, y) nu^{x,mu}(dy).
///
///   analytic_linear   linear_test family: F-bar = a x / (lambda - c).
///   ergodic_estimate  time average of F along frozen paths after burn-in,
///                     cached on a quantized (x, mu_stat) grid.
///   stable_quadrature bounded_smooth family: the frozen equation is a
///                     per-mode stable OU process, so nu is a shifted,
///                     scaled stable law and F-bar_k = a E tanh(x_k + m_k + s_k S).
class AveragedDrift {
 public:
  AveragedDrift(FbarMode mode, const OperatorSpec& spec, const CoefficientSet& coeffs, ErgodicSettings settings = {});
  ~AveragedDrift();
  AveragedDrift(AveragedDrift&&) noexcept;
  AveragedDrift& operator=(AveragedDrift&&) noexcept;

  FbarMode mode() const noexcept;
  const ErgodicSettings& settings() const noexcept;

  /// Thread-safe evaluation used inside the averaged solver.
  void evaluate(std::span<const double> x, double mu_stat, std::span<double> out) const;
  /// Uncached estimate with its standard error.
  FbarEstimate estimate(std::span<const double> x, double mu_stat) const;
  std::size_t cache_size() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

FbarEstimate estimate_fbar(const AveragedDrift& drift, const FrozenInput& input);

struct DecayReport {
  std::vector<double> t;
  std::vector<double> gap_value;  // |E F(x, mu, Y_t^y) - F-bar(x, mu)|
  std::vector<double> std_error;
  double gap = 0.0;  // lambda_1 - L_G
  bool signal = false;
  std::optional<double> fitted_rate;
  std::optional<double> rate_stderr;
  double envelope_C = 0.0;
  bool envelope_ok = false;
  std::size_t points_used = 0;
};

/// Estimates E F(Y_t^y) - E_nu F with a synchronous coupling: each replica
/// runs from y and from a stationary start (a burn-in path on an independent
/// stream), driven by the same noise afterwards. Points within 3 standard
/// errors of zero carry no signal and are left out of the rate fit.
DecayReport ergodicity_decay(const FrozenInput& input, const OperatorSpec& spec, const CoefficientSet& coeffs,
                             std::span<const double> t_grid, std::size_t n_replicas, std::uint64_t seed,
                             double h = 1.0 / 64.0, int threads = 0);

/// simulate_mkv with B := F-bar on the fast grid of the paired slow-fast
/// run, using the same slow streams. Throws if `expected` differs from the
/// streams this run would use.
PathEnsemble simulate_averaged(const MultiscaleConfig& cfg, const AveragedDrift& drift,
                               const std::optional<StreamManifest>& expected = std::nullopt);

struct StrongError {
  double error = 0.0;
  double std_error = 0.0;
  std::vector<double> per_particle;  // max over the macro grid of |X^eps - X-bar|
};

/// ((1/M) sum_i max_j |X^eps_{t_j} - X-bar_{t_j}|^m)^{1/m} under synchronous
/// coupling. Refuses coefficients without the B3 bound on F.
StrongError strong_error(const MultiscaleConfig& cfg, const AveragedDrift& drift, double m);

}  // namespace mvlevy
