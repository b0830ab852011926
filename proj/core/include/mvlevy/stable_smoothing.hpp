#pragma once

// phi(z; s) = E tanh(z + s S) for S standard symmetric alpha-stable.
//
// Fourier form: tanh has transform pi / sinh(pi w / 2) (odd part), so
//   phi(z; s) = int_0^inf sin(w z) e^{-(s w)^alpha} / sinh(pi w / 2) dw.
// At s = 0 this is the classical integral for tanh z.

#include <cstddef>
#include <vector>

namespace mvlevy {

/// Direct quadrature of the Fourier integral (Gauss-Legendre panels).
/// Returns {phi, dphi/dz}.
struct PhiValue {
  double value = 0.0;
  double slope = 0.0;
};
PhiValue stable_tanh_quadrature(double z, double s, double alpha);

/// Large-|z| expansion: sign(z) (1 - 2 P(s S > |z|)) using the first terms
/// of the stable tail series.
double stable_tanh_asymptotic(double z, double s, double alpha);

/// Tabulated phi(.; s) for fixed (s, alpha): cubic Hermite interpolation on
/// [-kTableEdge, kTableEdge] with step 2^-8, asymptotic expansion beyond.
/// Immutable after construction; safe to share across threads.
class StableTanh {
 public:
  StableTanh(double s, double alpha);

  double operator()(double z) const;
  double scale() const noexcept { return s_; }

  static constexpr double kTableEdge = 16.0;
  static constexpr double kStep = 1.0 / 256.0;

 private:
  double s_;
  double alpha_;
  std::vector<double> value_;  // z = i * kStep, i = 0..n
  std::vector<double> slope_;
};

}  // namespace mvlevy
