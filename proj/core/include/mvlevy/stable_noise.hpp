#pragma once

// Symmetric alpha-stable sampling and exact per-step stochastic convolution
// increments of the cylindrical processes L (slow) and Z (fast).

#include <cstdint>
#include <span>
#include <vector>

#include "mvlevy/rng.hpp"
#include "mvlevy/spectral.hpp"

namespace mvlevy {

/// Precomputed Chambers-Mallows-Stuck constants for one alpha.
class StableSampler {
 public:
  /// Throws std::invalid_argument unless 1 < alpha < 2.
  explicit StableSampler(double alpha);

  double alpha() const noexcept { return alpha_; }

  /// S with E[e^{ihS}] = e^{-|h|^alpha}, from u1, u2 in (0, 1).
  double operator()(double u1, double u2) const noexcept;
  /// One draw from one Philox block (words 0-1 give U, words 2-3 give W).
  double from_block(const PhiloxCounter& blk) const noexcept;

 private:
  double alpha_;
  double inv_alpha_;
  double tail_exp_;  // (1 - alpha) / alpha
};

double sample_standard_stable(RngStream& rng, double alpha);

enum class NoiseProcess { slow, fast };

/// Scales sigma_k(h) of the per-step convolution increment.
///   slow: beta_k  ((1 - e^{-alpha lambda_k h}) / (alpha lambda_k))^{1/alpha}
///   fast: gamma_k ((1 - e^{-alpha lambda_k h / eps}) / (alpha lambda_k))^{1/alpha}
/// The fast form is the law of eps^{-1/alpha} int e^{(h-s)A/eps} dZ_s.
std::vector<double> convolution_scales(const OperatorSpec& spec, double h, NoiseProcess process,
                                       double epsilon = 1.0);

/// One sample of int_t^{t+h} e^{(t+h-s)A} dL_s (or its fast analogue).
struct ConvolutionIncrement {
  SpectralField field;
  double h = 0.0;
};

/// Draws the increment for time step `step` of a stream. Coordinate k uses
/// block (step, lane k), so a run can regenerate any increment exactly.
ConvolutionIncrement sample_convolution_increment(const OperatorSpec& spec, double h,
                                                  const RngStream& rng, std::uint64_t step,
                                                  NoiseProcess process, double epsilon = 1.0);

/// Hot-loop variant: writes scales[k] * S_k into out.
inline void fill_increment(const StableSampler& sampler, std::span<const double> scales,
                           const RngStream& rng, std::uint64_t step, std::span<double> out) noexcept {
  for (std::size_t k = 0; k < scales.size(); ++k) {
    out[k] = scales[k] == 0.0 ? 0.0
                              : scales[k] * sampler.from_block(rng.block(step, static_cast<std::uint32_t>(k)));
  }
}

/// (1/n) sum cos(h s_i): unbiased for the real characteristic function.
double chf_estimate(std::span<const double> samples, double h);

}  // namespace mvlevy
