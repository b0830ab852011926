#pragma once

// Drift maps B(x, mu), F(x, mu, y), G(x, mu, y) with declared Lipschitz and
// boundedness constants. A law mu enters only through the scalar
// mu_stat = (mu(|.|^p))^{1/p}; that scalar is 1-Lipschitz in W_p, so a
// coefficient Lipschitz in (x, mu_stat, y) is Lipschitz in (x, W_p, y).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "mvlevy/rng.hpp"
#include "mvlevy/spectral.hpp"

namespace mvlevy {

using LawDrift = std::function<void(std::span<const double> x, double mu_stat, std::span<double> out)>;
using SlowFastDrift =
    std::function<void(std::span<const double> x, double mu_stat, std::span<const double> y, std::span<double> out)>;

struct BuiltinFamily {
  enum class Variant { bounded_smooth, linear_test };
  Variant variant = Variant::bounded_smooth;
  double a = 1.0;
  double b_mu = 0.5;
  double c = 0.5;
  std::size_t K = 0;  // active modes; 0 means min(N, 4)

  friend bool operator==(const BuiltinFamily&, const BuiltinFamily&) = default;
};

std::string to_string(BuiltinFamily::Variant v);
BuiltinFamily::Variant parse_variant(const std::string& name);

struct CoefficientSet {
  LawDrift B;
  SlowFastDrift F;
  SlowFastDrift G;
  double lip_C = 0.0;
  double lip_G_y = 0.0;  // L_G
  double p = 1.0;
  bool F_bounded = false;
  double bound_C = 0.0;  // sup |F| <= bound_C (1 + mu_stat) when F_bounded
  std::optional<BuiltinFamily> family;
};

/// bounded_smooth:
///   F_k = a tanh(x_k + y_k) [k <= K] + b_mu min(1, mu_stat) [k = 1]
///   G_k = a tanh(x_k) [k <= K] + c y_k
/// linear_test:
///   F = y, G = a x + c y   (unbounded F; oracle use only)
/// B is F with the y argument removed (y = 0).
CoefficientSet make_builtin(const BuiltinFamily& family, std::size_t n_modes, double p);

CoefficientSet zero_coefficients(double p);

/// mu_stat of an empirical measure, i.e. p_moment.
class EmpiricalMeasure;
double law_statistic(const EmpiricalMeasure& mu, double p);

struct ProbeReport {
  double ratio_B = 0.0;
  double ratio_F = 0.0;
  double ratio_G = 0.0;
  std::optional<double> ratio_envelope;  // only when F_bounded
  std::size_t n_probes = 0;

  static constexpr double kTolerance = 1e-9;
  bool passed() const;
};

/// Largest observed |difference| / (declared bound) over random probe pairs.
/// Half of the pairs are close (relative separation 1e-3) to catch local
/// slopes. `scale` multiplies every probe magnitude.
ProbeReport probe_lipschitz(const CoefficientSet& coeffs, const OperatorSpec& spec, std::size_t n_probes,
                            RngStream& rng, double scale = 1.0);

struct EffectiveConstants {
  double lip_C = 0.0;
  double L_G = 0.0;
  double gap = 0.0;        // lambda_1 - L_G
  double fbar_lip = 0.0;   // lip_C (1 + lip_C / gap); Lipschitz constant of the averaged drift
  bool fatal = false;      // gap <= 0
};

EffectiveConstants effective_constants(const CoefficientSet& coeffs, const OperatorSpec& spec);

/// Throws AssumptionError("B3", ...) when lambda_1 - L_G <= 0.
void require_dissipative(const CoefficientSet& coeffs, const OperatorSpec& spec);

/// validate_spec plus the coefficient checks: A2 (B probe), B1 (F and G
/// probes), B3 (dissipativity gap and the bound on F).
ValidationReport validate_assumptions(const OperatorSpec& spec, const CoefficientSet& coeffs,
                                      std::uint64_t probe_seed = 0, std::size_t n_probes = 256);

/// Throws AssumptionError for the first failing check among `names`.
void require_checks(const ValidationReport& report, std::initializer_list<const char*> names);

}  // namespace mvlevy
