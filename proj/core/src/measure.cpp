#include "mvlevy/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mvlevy/assignment.hpp"

namespace mvlevy {

EmpiricalMeasure::EmpiricalMeasure(std::size_t particles, std::size_t modes)
    : particles_(particles), modes_(modes), data_(particles * modes, 0.0) {
  if (particles == 0) throw std::invalid_argument("EmpiricalMeasure: need at least one particle");
}

EmpiricalMeasure::EmpiricalMeasure(std::size_t particles, std::size_t modes, std::vector<double> data)
    : particles_(particles), modes_(modes), data_(std::move(data)) {
  if (particles == 0) throw std::invalid_argument("EmpiricalMeasure: need at least one particle");
  if (data_.size() != particles * modes) throw std::invalid_argument("EmpiricalMeasure: data size != M*N");
}

EmpiricalMeasure::EmpiricalMeasure(const std::vector<SpectralField>& particles) {
  if (particles.empty()) throw std::invalid_argument("EmpiricalMeasure: need at least one particle");
  particles_ = particles.size();
  modes_ = particles.front().size();
  data_.reserve(particles_ * modes_);
  for (const auto& u : particles) {
    if (u.size() != modes_) throw std::invalid_argument("EmpiricalMeasure: particles differ in length");
    data_.insert(data_.end(), u.coeffs().begin(), u.coeffs().end());
  }
}

EmpiricalMeasure EmpiricalMeasure::dirac(const SpectralField& u, std::size_t copies) {
  EmpiricalMeasure mu(copies, u.size());
  for (std::size_t i = 0; i < copies; ++i) std::copy(u.coeffs().begin(), u.coeffs().end(), mu.particle(i).begin());
  return mu;
}

namespace {

void check_p(double p) {
  if (!(p >= 1.0 && p < 2.0)) throw std::invalid_argument("moment order p must lie in [1, 2)");
}

void check_pair(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  if (mu.size() != nu.size()) throw std::invalid_argument("Wasserstein: unequal particle counts");
  if (mu.modes() != nu.modes()) throw std::invalid_argument("Wasserstein: unequal field lengths");
  if (mu.size() == 0) throw std::invalid_argument("Wasserstein: empty measure");
}

double dist(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] - y[k]) * (x[k] - y[k]);
  return std::sqrt(s);
}

double sliced_1d(std::vector<double>& a, std::vector<double>& b, double p) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::pow(std::abs(a[i] - b[i]), p);
  return std::pow(s / static_cast<double>(a.size()), 1.0 / p);
}

}  // namespace

double p_moment(const EmpiricalMeasure& mu, double p) {
  check_p(p);
  if (mu.size() == 0) throw std::invalid_argument("p_moment: empty measure");
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) s += std::pow(norm(mu.particle(i)), p);
  return std::pow(s / static_cast<double>(mu.size()), 1.0 / p);
}

double wasserstein_exact(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p) {
  check_p(p);
  check_pair(mu, nu);
  const std::size_t m = mu.size();
  if (m > kExactAssignmentLimit)
    throw std::invalid_argument("wasserstein_exact: M exceeds the exact solver limit; use wasserstein_sliced");
  std::vector<double> cost(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) cost[i * m + j] = std::pow(dist(mu.particle(i), nu.particle(j)), p);
  const Assignment a = solve_assignment(cost, m);
  return std::pow(std::max(0.0, a.total_cost) / static_cast<double>(m), 1.0 / p);
}

double wasserstein_sliced(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p,
                          std::span<const SpectralField> directions) {
  check_p(p);
  check_pair(mu, nu);
  if (directions.empty()) throw std::invalid_argument("wasserstein_sliced: zero projections");
  const std::size_t m = mu.size();
  std::vector<double> a(m), b(m);
  double total = 0.0;
  for (const auto& dir : directions) {
    if (dir.size() != mu.modes()) throw std::invalid_argument("wasserstein_sliced: direction length mismatch");
    const double len = dir.norm();
    if (!(len > 0.0)) throw std::invalid_argument("wasserstein_sliced: zero direction");
    for (std::size_t i = 0; i < m; ++i) {
      double sa = 0.0, sb = 0.0;
      for (std::size_t k = 0; k < dir.size(); ++k) {
        sa += mu.particle(i)[k] * dir[k];
        sb += nu.particle(i)[k] * dir[k];
      }
      a[i] = sa / len;
      b[i] = sb / len;
    }
    total += sliced_1d(a, b, p);
  }
  return total / static_cast<double>(directions.size());
}

double wasserstein_sliced(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p,
                          std::size_t n_projections, RngStream& rng) {
  if (n_projections == 0) throw std::invalid_argument("wasserstein_sliced: zero projections");
  std::vector<SpectralField> dirs;
  dirs.reserve(n_projections);
  while (dirs.size() < n_projections) {
    SpectralField d(mu.modes());
    for (std::size_t k = 0; k < d.size(); ++k) {
      // Box-Muller; only the cosine branch is used so each coordinate is one pair.
      const double r = std::sqrt(-2.0 * std::log(rng.uniform()));
      d[k] = r * std::cos(2.0 * std::numbers::pi * rng.uniform());
    }
    if (d.norm() > 0.0) dirs.push_back(std::move(d));
  }
  return wasserstein_sliced(mu, nu, p, dirs);
}

double dT_metric(const LawFlow& mu, const LawFlow& nu, double lambda_weight, double p, DtOptions opts) {
  if (mu.times != nu.times || mu.measures.size() != mu.times.size() || nu.measures.size() != nu.times.size())
    throw std::invalid_argument("dT_metric: time grid mismatch");
  double best = 0.0;
  for (std::size_t j = 0; j < mu.times.size(); ++j) {
    const auto& a = mu.measures[j];
    const auto& b = nu.measures[j];
    double w = 0.0;
    if (a.size() <= kExactAssignmentLimit) {
      w = wasserstein_exact(a, b, p);
    } else {
      RngStream rng(opts.projection_seed, {j, 0, channel::projection});
      w = wasserstein_sliced(a, b, p, opts.n_projections, rng);
    }
    best = std::max(best, std::exp(-lambda_weight * mu.times[j]) * w);
  }
  return best;
}

}  // namespace mvlevy
