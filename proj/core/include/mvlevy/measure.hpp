#pragma once

// Equal-weight empirical measures standing in for laws in P_p, their moments,
// Wasserstein distances and the weighted law-flow metric D_T.

#include <cstddef>
#include <span>
#include <vector>

#include "mvlevy/rng.hpp"
#include "mvlevy/spectral.hpp"

namespace mvlevy {

/// M particles of N coordinates each, stored row-major (particle-major).
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  EmpiricalMeasure(std::size_t particles, std::size_t modes);
  EmpiricalMeasure(std::size_t particles, std::size_t modes, std::vector<double> data);
  explicit EmpiricalMeasure(const std::vector<SpectralField>& particles);

  /// M copies of u: the empirical stand-in for a Dirac mass.
  static EmpiricalMeasure dirac(const SpectralField& u, std::size_t copies);

  std::size_t size() const noexcept { return particles_; }
  std::size_t modes() const noexcept { return modes_; }
  std::span<const double> particle(std::size_t i) const noexcept {
    return {data_.data() + i * modes_, modes_};
  }
  std::span<double> particle(std::size_t i) noexcept { return {data_.data() + i * modes_, modes_}; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  friend bool operator==(const EmpiricalMeasure&, const EmpiricalMeasure&) = default;

 private:
  std::size_t particles_ = 0;
  std::size_t modes_ = 0;
  std::vector<double> data_;
};

/// A law flow on a time grid: one measure per grid time, common M.
struct LawFlow {
  std::vector<double> times;
  std::vector<EmpiricalMeasure> measures;

  std::size_t size() const noexcept { return times.size(); }
};

/// ((1/M) sum |x_i|^p)^{1/p}, 1 <= p < 2.
double p_moment(const EmpiricalMeasure& mu, double p);

inline constexpr std::size_t kExactAssignmentLimit = 256;

/// min over permutations of ((1/M) sum |x_i - y_sigma(i)|^p)^{1/p}.
/// Requires equal M <= kExactAssignmentLimit.
double wasserstein_exact(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p);

/// Mean over random unit directions of the 1-D p-Wasserstein distance of
/// the projected samples. Requires equal M.
double wasserstein_sliced(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p,
                          std::size_t n_projections, RngStream& rng);
double wasserstein_sliced(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p,
                          std::span<const SpectralField> directions);

struct DtOptions {
  std::uint64_t projection_seed = 0;
  std::size_t n_projections = 64;
};

/// max_j e^{-lambda t_j} W_p(mu_{t_j}, nu_{t_j}) on the common grid; exact
/// assignment when M <= kExactAssignmentLimit, sliced otherwise.
double dT_metric(const LawFlow& mu, const LawFlow& nu, double lambda_weight, double p, DtOptions opts = {});

}  // namespace mvlevy
