#include "mvlevy/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mvlevy {

double norm(std::span<const double> u) {
  double s = 0.0;
  for (double v : u) s += v * v;
  return std::sqrt(s);
}

double SpectralField::norm() const { return mvlevy::norm(coeffs_); }

bool SpectralField::finite() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](double v) { return std::isfinite(v); });
}

SpectralField SpectralField::resized(std::size_t n) const {
  std::vector<double> out(n, 0.0);
  std::copy_n(coeffs_.begin(), std::min(n, coeffs_.size()), out.begin());
  return SpectralField(std::move(out));
}

double OperatorSpec::lambda(std::size_t k) const {
  return c_lambda * std::pow(static_cast<double>(k), a);
}
double OperatorSpec::beta(std::size_t k) const {
  return c_beta * std::pow(static_cast<double>(k), -b);
}
double OperatorSpec::gamma(std::size_t k) const {
  return c_gamma * std::pow(static_cast<double>(k), -g);
}

namespace {

template <class Fn>
std::vector<double> tabulate(std::size_t n, Fn fn) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = fn(k + 1);
  return out;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::vector<double> OperatorSpec::lambdas() const {
  return tabulate(n_modes, [this](std::size_t k) { return lambda(k); });
}
std::vector<double> OperatorSpec::betas() const {
  return tabulate(n_modes, [this](std::size_t k) { return beta(k); });
}
std::vector<double> OperatorSpec::gammas() const {
  return tabulate(n_modes, [this](std::size_t k) { return gamma(k); });
}

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const AssumptionCheck* ValidationReport::find(const std::string& name) const {
  auto it = std::find_if(checks.begin(), checks.end(), [&](const auto& c) { return c.name == name; });
  return it == checks.end() ? nullptr : &*it;
}

const AssumptionCheck* ValidationReport::first_failure() const {
  auto it = std::find_if(checks.begin(), checks.end(), [](const auto& c) { return !c.passed; });
  return it == checks.end() ? nullptr : &*it;
}

ValidationReport validate_spec(const OperatorSpec& spec) {
  if (!(spec.alpha > 1.0 && spec.alpha < 2.0))
    throw std::invalid_argument("alpha out of range: need 1 < alpha < 2, got " + fmt_double(spec.alpha));
  if (!(spec.theta > 0.0 && spec.theta <= 2.0 / spec.alpha))
    throw std::invalid_argument("theta out of range: need 0 < theta <= 2/alpha, got " +
                                fmt_double(spec.theta));
  if (!(spec.p >= 1.0 && spec.p < spec.alpha))
    throw std::invalid_argument("p out of range: need 1 <= p < alpha, got " + fmt_double(spec.p));
  if (spec.n_modes == 0) throw std::invalid_argument("n_modes must be positive");
  if (!(spec.c_beta >= 0.0) || !(spec.c_gamma >= 0.0))
    throw std::invalid_argument("noise amplitudes c_beta, c_gamma must be nonnegative");

  ValidationReport report;
  const double al = spec.alpha;

  {
    const bool ok = spec.c_lambda > 0.0 && spec.a > 0.0;
    report.checks.push_back({"A1", ok,
                             "lambda_k = " + fmt_double(spec.c_lambda) + " k^" + fmt_double(spec.a) +
                                 (ok ? " is positive and strictly increasing"
                                     : " is not positive and strictly increasing")});
  }
  {
    const double e = al * spec.b + spec.a;
    const bool ok = spec.c_beta == 0.0 || e > 1.0;
    report.checks.push_back({"A3", ok,
                             "sum beta_k^alpha / lambda_k: exponent alpha*b + a = " + fmt_double(e) +
                                 (ok ? " > 1" : " <= 1 (series diverges)")});
  }
  {
    const double es = al * spec.b + spec.a * (1.0 - al * spec.theta / 2.0);
    const double ef = al * spec.g + spec.a;
    const bool slow_ok = spec.c_beta == 0.0 || es > 1.0;
    const bool fast_ok = spec.c_gamma == 0.0 || ef > 1.0;
    std::string detail = "slow exponent alpha*b + a(1 - alpha*theta/2) = " + fmt_double(es) +
                         (slow_ok ? " > 1" : " <= 1 (slow series diverges)") +
                         "; fast exponent alpha*g + a = " + fmt_double(ef) +
                         (fast_ok ? " > 1" : " <= 1 (fast series diverges)");
    report.checks.push_back({"B2", slow_ok && fast_ok, std::move(detail)});
  }
  return report;
}

SpectralField apply_semigroup(const SpectralField& u, double t, const OperatorSpec& spec) {
  if (!(t >= 0.0)) throw std::invalid_argument("apply_semigroup: negative time");
  if (u.size() != spec.n_modes) throw std::invalid_argument("apply_semigroup: field length != n_modes");
  SpectralField out = u;
  for (std::size_t k = 0; k < u.size(); ++k) out[k] *= std::exp(-spec.lambda(k + 1) * t);
  return out;
}

double sobolev_norm(const SpectralField& u, double sigma, const OperatorSpec& spec) {
  if (!u.finite()) throw std::invalid_argument("sobolev_norm: non-finite input");
  if (u.size() != spec.n_modes) throw std::invalid_argument("sobolev_norm: field length != n_modes");
  if (!(sigma >= 0.0 && sigma <= 2.0)) throw std::invalid_argument("sobolev_norm: sigma outside [0, 2]");
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += std::pow(spec.lambda(k + 1), sigma) * u[k] * u[k];
  return std::sqrt(s);
}

}  // namespace mvlevy
