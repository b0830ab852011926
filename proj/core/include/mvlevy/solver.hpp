#pragma once

// Exponential Euler integration of the mild McKean-Vlasov equation with an
// interacting-particle closure of the law, and the Picard iteration on law
// flows.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvlevy/coefficients.hpp"
#include "mvlevy/measure.hpp"
#include "mvlevy/spectral.hpp"
#include "mvlevy/stable_noise.hpp"

namespace mvlevy {

struct SimConfig {
  OperatorSpec spec;
  CoefficientSet coeffs;
  double T = 1.0;
  double h = 1.0 / 256.0;
  std::size_t M = 1000;
  SpectralField xi;  // empty means zero
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
  int threads = 0;

  /// J = round(T / h); throws unless h > 0 and J h matches T to 1e-9 relative.
  std::size_t steps() const;
  SpectralField initial() const;
};

/// Per-mode factors of one exponential Euler step on the time scale
/// `time_scale` (1 for the slow equation, epsilon for the fast one):
///   decay_k  = e^{-lambda_k h / time_scale}
///   weight_k = (1 - e^{-lambda_k h / time_scale}) / lambda_k
struct StepFactors {
  std::vector<double> decay;
  std::vector<double> weight;
};

StepFactors step_factors(const OperatorSpec& spec, double h, double time_scale = 1.0);

/// u <- decay u + weight drift + noise, coordinate-wise. Shared by every
/// integrator so coupled runs perform bitwise identical arithmetic.
inline void exp_euler_update(std::span<double> u, std::span<const double> drift, std::span<const double> noise,
                             const StepFactors& f) noexcept {
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = f.decay[k] * u[k] + f.weight[k] * drift[k] + noise[k];
}

/// One step u_k+ = e^{-lambda_k h} u_k + ((1 - e^{-lambda_k h}) / lambda_k) drift_k + noise_k.
SpectralField step_exponential_euler(const SpectralField& u, const SpectralField& drift, double h,
                                     const OperatorSpec& spec, const ConvolutionIncrement& noise_inc);

/// Particle paths on the grid t_j = j h; stored time-major as a law flow.
class PathEnsemble {
 public:
  PathEnsemble() = default;
  explicit PathEnsemble(LawFlow flow) : flow_(std::move(flow)) {}

  std::size_t particles() const { return flow_.measures.empty() ? 0 : flow_.measures.front().size(); }
  std::size_t times() const { return flow_.times.size(); }
  std::size_t modes() const { return flow_.measures.empty() ? 0 : flow_.measures.front().modes(); }
  /// X_{t_j}^{(i)}.
  std::span<const double> at(std::size_t i, std::size_t j) const { return flow_.measures[j].particle(i); }
  const LawFlow& law_flow() const noexcept { return flow_; }
  LawFlow& law_flow() noexcept { return flow_; }

 private:
  LawFlow flow_;
};

/// Runs validate_assumptions and throws AssumptionError unless A1-A3 hold.
void require_single_scale(const SimConfig& cfg);

/// Interacting particles: at step j every particle sees the empirical law
/// of the ensemble at t_j through mu_stat. Particle i draws its slow noise
/// from stream (seed, {replica, i, slow}) at block (j, k).
PathEnsemble simulate_mkv(const SimConfig& cfg);

struct PicardReport {
  std::vector<double> d;       // d_n = D_T(mu^{n+1}, mu^n), n = 0 .. n_iters-1
  std::vector<double> ratios;  // d_{n+1} / d_n
  std::optional<std::size_t> floor_index;  // first n where d_n stopped decreasing
  double lambda_weight = 0.0;
  std::vector<std::string> warnings;
  std::string note;
  LawFlow final_flow;
};

/// Picard iteration on law flows. mu^0 is the constant flow of delta_xi; at
/// stage n the M particles solve the equation with the law frozen to mu^n
/// (read on the grid), using the same noise at every stage.
/// lambda_weight <= 0 selects 4 lip_C.
PicardReport picard_law_iteration(const SimConfig& cfg, std::size_t n_iters, double lambda_weight = 0.0);

/// One frozen-law pass: particles driven by B(X, mu_stat[j]) with given
/// per-time statistics. Exposed for tests.
PathEnsemble solve_frozen_law(const SimConfig& cfg, std::span<const double> mu_stat_per_time);

struct MomentReport {
  double m = 1.0;
  std::vector<double> moments;  // ((1/M) sum |X_t|^m)^{1/m} per grid time
  double sup = 0.0;
  bool finite = true;
  double trend_slope = 0.0;  // fitted d(moment)/dt on the second half
  double trend_stderr = 0.0;
  bool stable = true;
};

/// m must lie in [p, alpha).
MomentReport moment_bound_check(const PathEnsemble& ensemble, double m, const OperatorSpec& spec);

}  // namespace mvlevy
