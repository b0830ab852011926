#include "mvlevy/stable_noise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mvlevy {

StableSampler::StableSampler(double alpha) : alpha_(alpha) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw std::invalid_argument("alpha out of range: need 1 < alpha < 2");
  inv_alpha_ = 1.0 / alpha;
  tail_exp_ = (1.0 - alpha) / alpha;
}

double StableSampler::operator()(double u1, double u2) const noexcept {
  const double u = std::numbers::pi * (u1 - 0.5);
  const double w = -std::log(u2);
  const double cos_u = std::cos(u);
  // sin(aU) / cos(U)^{1/a} * (cos((1-a)U) / W)^{(1-a)/a}
  const double log_mag = -inv_alpha_ * std::log(cos_u) +
                         tail_exp_ * (std::log(std::cos((1.0 - alpha_) * u)) - std::log(w));
  return std::sin(alpha_ * u) * std::exp(log_mag);
}

double StableSampler::from_block(const PhiloxCounter& blk) const noexcept {
  return (*this)(to_open_unit(blk[0], blk[1]), to_open_unit(blk[2], blk[3]));
}

double sample_standard_stable(RngStream& rng, double alpha) {
  const StableSampler sampler(alpha);
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  return sampler(u1, u2);
}

std::vector<double> convolution_scales(const OperatorSpec& spec, double h, NoiseProcess process,
                                       double epsilon) {
  if (!(h > 0.0)) throw std::invalid_argument("convolution increment: step h must be positive");
  if (process == NoiseProcess::fast && !(epsilon > 0.0))
    throw std::invalid_argument("convolution increment: epsilon must be positive");
  const double al = spec.alpha;
  const double rate = process == NoiseProcess::fast ? 1.0 / epsilon : 1.0;
  std::vector<double> scales(spec.n_modes);
  for (std::size_t k = 1; k <= spec.n_modes; ++k) {
    const double lam = spec.lambda(k);
    const double amp = process == NoiseProcess::fast ? spec.gamma(k) : spec.beta(k);
    const double var_like = -std::expm1(-al * lam * h * rate) / (al * lam);
    scales[k - 1] = amp * std::pow(var_like, 1.0 / al);
  }
  return scales;
}

ConvolutionIncrement sample_convolution_increment(const OperatorSpec& spec, double h, const RngStream& rng,
                                                  std::uint64_t step, NoiseProcess process, double epsilon) {
  const StableSampler sampler(spec.alpha);
  const auto scales = convolution_scales(spec, h, process, epsilon);
  ConvolutionIncrement inc{SpectralField(spec.n_modes), h};
  fill_increment(sampler, scales, rng, step, inc.field.view());
  return inc;
}

double chf_estimate(std::span<const double> samples, double h) {
  if (samples.empty()) throw std::invalid_argument("chf_estimate: empty sample");
  double s = 0.0;
  for (double x : samples) s += std::cos(h * x);
  return s / static_cast<double>(samples.size());
}

}  // namespace mvlevy
