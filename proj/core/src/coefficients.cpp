#include "mvlevy/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "mvlevy/errors.hpp"
#include "mvlevy/measure.hpp"

namespace mvlevy {

std::string to_string(BuiltinFamily::Variant v) {
  return v == BuiltinFamily::Variant::bounded_smooth ? "bounded_smooth" : "linear_test";
}

BuiltinFamily::Variant parse_variant(const std::string& name) {
  if (name == "bounded_smooth") return BuiltinFamily::Variant::bounded_smooth;
  if (name == "linear_test") return BuiltinFamily::Variant::linear_test;
  throw std::invalid_argument("unknown coefficient variant '" + name + "'");
}

double law_statistic(const EmpiricalMeasure& mu, double p) { return p_moment(mu, p); }

CoefficientSet make_builtin(const BuiltinFamily& family, std::size_t n_modes, double p) {
  if (n_modes == 0) throw std::invalid_argument("make_builtin: n_modes must be positive");
  const double a = family.a, b_mu = family.b_mu, c = family.c;
  const std::size_t K = family.K == 0 ? std::min<std::size_t>(n_modes, 4) : family.K;
  if (K > n_modes) throw std::invalid_argument("make_builtin: K exceeds n_modes");

  CoefficientSet cs;
  cs.p = p;
  BuiltinFamily resolved = family;
  resolved.K = K;
  cs.family = resolved;

  if (family.variant == BuiltinFamily::Variant::bounded_smooth) {
    cs.F = [a, b_mu, K](std::span<const double> x, double ms, std::span<const double> y, std::span<double> out) {
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = k < K ? a * std::tanh(x[k] + y[k]) : 0.0;
      out[0] += b_mu * std::min(1.0, ms);
    };
    cs.G = [a, c, K](std::span<const double> x, double, std::span<const double> y, std::span<double> out) {
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = (k < K ? a * std::tanh(x[k]) : 0.0) + c * y[k];
    };
    cs.B = [a, b_mu, K](std::span<const double> x, double ms, std::span<double> out) {
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = k < K ? a * std::tanh(x[k]) : 0.0;
      out[0] += b_mu * std::min(1.0, ms);
    };
    cs.lip_C = std::max(std::abs(a), std::abs(b_mu));
    cs.lip_G_y = std::abs(c);
    cs.F_bounded = true;
    cs.bound_C = std::abs(a) * std::sqrt(static_cast<double>(K)) + std::abs(b_mu);
  } else {
    cs.F = [](std::span<const double>, double, std::span<const double> y, std::span<double> out) {
      std::copy(y.begin(), y.end(), out.begin());
    };
    cs.G = [a, c](std::span<const double> x, double, std::span<const double> y, std::span<double> out) {
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = a * x[k] + c * y[k];
    };
    cs.B = [](std::span<const double>, double, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
    cs.lip_C = std::max(1.0, std::abs(a));
    cs.lip_G_y = std::abs(c);
    cs.F_bounded = false;
  }
  return cs;
}

CoefficientSet zero_coefficients(double p) {
  CoefficientSet cs;
  cs.p = p;
  cs.B = [](std::span<const double>, double, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
  cs.F = [](std::span<const double>, double, std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  cs.G = cs.F;
  cs.F_bounded = true;
  return cs;
}

bool ProbeReport::passed() const {
  const double lim = 1.0 + kTolerance;
  return ratio_B <= lim && ratio_F <= lim && ratio_G <= lim && (!ratio_envelope || *ratio_envelope <= lim);
}

namespace {

double ratio(double num, double den) {
  if (num == 0.0) return 0.0;
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return num / den;
}

double gaussian(RngStream& rng) {
  const double r = std::sqrt(-2.0 * std::log(rng.uniform()));
  return r * std::cos(2.0 * 3.14159265358979323846 * rng.uniform());
}

double diff_norm(const std::vector<double>& u, const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += (u[k] - v[k]) * (u[k] - v[k]);
  return std::sqrt(s);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

ProbeReport probe_lipschitz(const CoefficientSet& coeffs, const OperatorSpec& spec, std::size_t n_probes,
                            RngStream& rng, double scale) {
  if (n_probes == 0) throw std::invalid_argument("probe_lipschitz: n_probes must be positive");
  constexpr std::size_t kParticles = 8;
  const std::size_t n = spec.n_modes;
  const double p = coeffs.p;

  ProbeReport rep;
  rep.n_probes = n_probes;
  if (coeffs.F_bounded) rep.ratio_envelope = 0.0;

  std::vector<double> x1(n), x2(n), y1(n), y2(n), o1(n), o2(n);
  EmpiricalMeasure m1(kParticles, n), m2(kParticles, n);

  for (std::size_t probe = 0; probe < n_probes; ++probe) {
    // Magnitudes spread log-uniformly over [1e-3, 1e3].
    const double mag = scale * std::exp(std::log(1e-3) + 6.0 * std::log(10.0) * rng.uniform());
    const bool close = probe % 2 == 1;
    const double sep = close ? 1e-3 * mag : mag;
    for (std::size_t k = 0; k < n; ++k) {
      x1[k] = mag * gaussian(rng);
      y1[k] = mag * gaussian(rng);
      x2[k] = (close ? x1[k] : 0.0) + sep * gaussian(rng);
      y2[k] = (close ? y1[k] : 0.0) + sep * gaussian(rng);
    }
    for (std::size_t i = 0; i < kParticles * n; ++i) {
      m1.data()[i] = mag * gaussian(rng);
      m2.data()[i] = (close ? m1.data()[i] : 0.0) + sep * gaussian(rng);
    }
    const double ms1 = law_statistic(m1, p), ms2 = law_statistic(m2, p);
    const double w = wasserstein_exact(m1, m2, p);
    const double dx = diff_norm(x1, x2), dy = diff_norm(y1, y2);

    if (coeffs.B) {
      coeffs.B(x1, ms1, o1);
      coeffs.B(x2, ms2, o2);
      rep.ratio_B = std::max(rep.ratio_B, ratio(diff_norm(o1, o2), coeffs.lip_C * (dx + w)));
    }
    if (coeffs.F) {
      coeffs.F(x1, ms1, y1, o1);
      coeffs.F(x2, ms2, y2, o2);
      rep.ratio_F = std::max(rep.ratio_F, ratio(diff_norm(o1, o2), coeffs.lip_C * (dx + w + dy)));
      if (coeffs.F_bounded) {
        const double env = coeffs.bound_C * (1.0 + ms1);
        rep.ratio_envelope = std::max(*rep.ratio_envelope, ratio(norm(o1), env));
      }
    }
    if (coeffs.G) {
      coeffs.G(x1, ms1, y1, o1);
      coeffs.G(x2, ms2, y2, o2);
      rep.ratio_G =
          std::max(rep.ratio_G, ratio(diff_norm(o1, o2), coeffs.lip_C * (dx + w) + coeffs.lip_G_y * dy));
    }
  }
  return rep;
}

EffectiveConstants effective_constants(const CoefficientSet& coeffs, const OperatorSpec& spec) {
  EffectiveConstants ec;
  ec.lip_C = coeffs.lip_C;
  ec.L_G = coeffs.lip_G_y;
  ec.gap = spec.lambda(1) - coeffs.lip_G_y;
  ec.fatal = !(ec.gap > 0.0);
  ec.fbar_lip = ec.fatal ? std::numeric_limits<double>::infinity() : ec.lip_C * (1.0 + ec.lip_C / ec.gap);
  return ec;
}

namespace {

std::string gap_detail(const EffectiveConstants& ec) {
  return "lambda_1 - L_G = " + fmt(ec.gap) + (ec.fatal ? " <= 0 (strong dissipative condition violated)" : " > 0");
}

}  // namespace

void require_dissipative(const CoefficientSet& coeffs, const OperatorSpec& spec) {
  const auto ec = effective_constants(coeffs, spec);
  if (ec.fatal) throw AssumptionError("B3", gap_detail(ec));
}

ValidationReport validate_assumptions(const OperatorSpec& spec, const CoefficientSet& coeffs,
                                      std::uint64_t probe_seed, std::size_t n_probes) {
  ValidationReport report = validate_spec(spec);
  if (coeffs.p != spec.p)
    throw std::invalid_argument("coefficient moment order p = " + fmt(coeffs.p) + " differs from operator p = " +
                                fmt(spec.p));

  RngStream rng(probe_seed, {0, 0, channel::probe});
  const ProbeReport probe = probe_lipschitz(coeffs, spec, n_probes, rng);
  const double lim = 1.0 + ProbeReport::kTolerance;

  const auto a2 = probe.ratio_B <= lim;
  report.checks.push_back({"A2", a2, "B Lipschitz probe: max ratio " + fmt(probe.ratio_B) + " with C = " +
                                      fmt(coeffs.lip_C) + (a2 ? "" : " (declared constant violated)")});

  const bool b1 = probe.ratio_F <= lim && probe.ratio_G <= lim;
  report.checks.push_back({"B1", b1,
                           "F/G Lipschitz probe: max ratios " + fmt(probe.ratio_F) + ", " + fmt(probe.ratio_G) +
                               " with C = " + fmt(coeffs.lip_C) + ", L_G = " + fmt(coeffs.lip_G_y) +
                               (b1 ? "" : " (declared constant violated)")});

  const auto ec = effective_constants(coeffs, spec);
  std::string detail = gap_detail(ec);
  bool b3 = !ec.fatal;
  if (!coeffs.F_bounded) {
    b3 = false;
    detail += "; F is not declared bounded";
  } else {
    const bool env = probe.ratio_envelope.value_or(0.0) <= lim;
    detail += "; sup|F| <= " + fmt(coeffs.bound_C) + "(1 + mu_stat), probe ratio " +
              fmt(probe.ratio_envelope.value_or(0.0));
    b3 = b3 && env;
  }
  report.checks.push_back({"B3", b3, detail});
  std::stable_sort(report.checks.begin(), report.checks.end(),
                   [](const AssumptionCheck& l, const AssumptionCheck& r) { return l.name < r.name; });
  return report;
}

void require_checks(const ValidationReport& report, std::initializer_list<const char*> names) {
  for (const char* name : names) {
    const AssumptionCheck* c = report.find(name);
    if (c == nullptr) throw std::logic_error(std::string("require_checks: no check named ") + name);
    if (!c->passed) throw AssumptionError(c->name, c->detail);
  }
}

}  // namespace mvlevy
