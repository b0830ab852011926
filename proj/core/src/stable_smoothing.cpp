#include "mvlevy/stable_smoothing.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mvlevy {

namespace {

// 8-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 4> kNodes = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                          0.9602898564975363};
constexpr std::array<double, 4> kWeights = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                            0.1012285362903763};

// 1/sinh(pi w / 2) drops below 1e-16 past w = 24.
constexpr double kOmegaMax = 24.0;

}  // namespace

PhiValue stable_tanh_quadrature(double z, double s, double alpha) {
  if (!(s >= 0.0)) throw std::invalid_argument("stable_tanh_quadrature: negative scale");
  double omega_max = kOmegaMax;
  // e^{-(s w)^alpha} < e^{-40} beyond this point.
  if (s > 0.0) omega_max = std::min(omega_max, std::pow(40.0, 1.0 / alpha) / s);
  const double width = std::min(0.5, 2.0 / (1.0 + std::abs(z)));
  const auto panels = static_cast<std::size_t>(std::ceil(omega_max / width));
  const double w = omega_max / static_cast<double>(panels);

  PhiValue out;
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = (static_cast<double>(p) + 0.5) * w;
    for (std::size_t q = 0; q < kNodes.size(); ++q) {
      for (const double sign : {-1.0, 1.0}) {
        const double om = mid + sign * 0.5 * w * kNodes[q];
        const double damp = (s > 0.0 ? std::exp(-std::pow(s * om, alpha)) : 1.0) /
                            std::sinh(0.5 * std::numbers::pi * om);
        const double wt = 0.5 * w * kWeights[q] * damp;
        out.value += wt * std::sin(om * z);
        out.slope += wt * om * std::cos(om * z);
      }
    }
  }
  return out;
}

double stable_tanh_asymptotic(double z, double s, double alpha) {
  if (s == 0.0) return std::tanh(z);
  const double x = std::abs(z) / s;
  const double pi = std::numbers::pi;
  constexpr int kTerms = 6;
  // P(S > x) = sum_n a_n x^{-n alpha},
  // a_n = (-1)^{n+1} Gamma(n alpha) sin(n pi alpha / 2) / (pi n!).
  double a[kTerms + 1] = {};
  double fact = 1.0;
  for (int n = 1; n <= kTerms; ++n) {
    fact *= n;
    a[n] = (n % 2 == 1 ? 1.0 : -1.0) * std::tgamma(n * alpha) * std::sin(n * pi * alpha / 2.0) / (pi * fact);
  }
  double tail = 0.0;
  for (int n = 1; n <= kTerms; ++n) tail += a[n] * std::pow(x, -n * alpha);

  // tanh - sign is odd with moments int u^m (tanh u - sign u) du = -2 I_m,
  // I_m = m! eta(m + 1) / 2^m. Expanding the density of sS around -z gives
  // the smoothing correction sum_m (2 I_m / m!) p^{(m)}(z) over odd m.
  const double eta[] = {pi * pi / 12.0, 7.0 * std::pow(pi, 4) / 720.0, 31.0 * std::pow(pi, 6) / 30240.0};
  double smooth = 0.0;
  for (int idx = 0, m = 1; m <= 5; ++idx, m += 2) {
    double dm = 0.0;
    for (int n = 1; n <= kTerms; ++n) {
      double prod = n * alpha;
      for (int i = 1; i <= m; ++i) prod *= n * alpha + i;
      dm += a[n] * prod * std::pow(x, -n * alpha - 1.0 - m);
    }
    smooth += 2.0 * eta[idx] / std::pow(2.0, m) * dm / std::pow(s, m + 1);
  }
  return std::copysign(1.0 - 2.0 * tail - smooth, z);
}

StableTanh::StableTanh(double s, double alpha) : s_(s), alpha_(alpha) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw std::invalid_argument("StableTanh: alpha out of range");
  if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("StableTanh: scale must be finite and >= 0");
  if (s == 0.0) return;
  const auto n = static_cast<std::size_t>(kTableEdge / kStep);
  value_.resize(n + 1);
  slope_.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const PhiValue v = stable_tanh_quadrature(static_cast<double>(i) * kStep, s, alpha);
    value_[i] = v.value;
    slope_[i] = v.slope;
  }
  value_[0] = 0.0;
}

double StableTanh::operator()(double z) const {
  if (s_ == 0.0) return std::tanh(z);
  const double az = std::abs(z);
  if (!(az < kTableEdge)) return std::isnan(z) ? z : stable_tanh_asymptotic(z, s_, alpha_);
  const double u = az / kStep;
  const auto i = static_cast<std::size_t>(u);
  const double t = u - static_cast<double>(i);
  // Cubic Hermite on [i, i+1].
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  const double v = h00 * value_[i] + h10 * kStep * slope_[i] + h01 * value_[i + 1] + h11 * kStep * slope_[i + 1];
  return std::copysign(v, z);
}

}  // namespace mvlevy
