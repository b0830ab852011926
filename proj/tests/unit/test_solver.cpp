#include <cmath>
#include <vector>

#include "doctest.h"
#include "mvlevy/coefficients.hpp"
#include "mvlevy/errors.hpp"
#include "mvlevy/solver.hpp"
#include "mvlevy/stable_noise.hpp"
#include "mvlevy/stats.hpp"

using namespace mvlevy;

namespace {

OperatorSpec small_spec(std::size_t n, double c_beta = 1.0) {
  OperatorSpec s;
  s.n_modes = n;
  s.c_beta = c_beta;
  return s;
}

SimConfig base_config(const OperatorSpec& s, const CoefficientSet& cs) {
  SimConfig c;
  c.spec = s;
  c.coeffs = cs;
  c.T = 1.0;
  c.h = 1.0 / 64.0;
  c.M = 64;
  c.seed = 3;
  return c;
}

CoefficientSet linear_b(double a) {
  CoefficientSet cs = zero_coefficients(1.0);
  cs.B = [a](std::span<const double> x, double, std::span<double> out) {
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = a * x[k];
  };
  cs.lip_C = std::abs(a);
  return cs;
}

}  // namespace

TEST_CASE("exponential Euler step") {
  OperatorSpec s = small_spec(2);  // lambda = (1, 4)
  const SpectralField u{1.0, 2.0};
  const ConvolutionIncrement none{SpectralField(2, 0.0), 0.3};
  const SpectralField v = step_exponential_euler(u, SpectralField(2, 0.0), 0.3, s, none);
  const SpectralField w = apply_semigroup(u, 0.3, s);
  CHECK(v[0] == doctest::Approx(w[0]));
  CHECK(v[1] == doctest::Approx(w[1]));

  // Fixed point when drift = lambda u.
  OperatorSpec one = small_spec(1);
  const ConvolutionIncrement z1{SpectralField(1, 0.0), std::log(2.0)};
  CHECK(step_exponential_euler(SpectralField{1.0}, SpectralField{1.0}, std::log(2.0), one, z1)[0] ==
        doctest::Approx(1.0));

  // Constant drift d drives u to d / lambda.
  SpectralField x(2, 0.0);
  const SpectralField d{3.0, 2.0};
  for (int i = 0; i < 400; ++i) x = step_exponential_euler(x, d, 0.1, s, none);
  CHECK(x[0] == doctest::Approx(3.0));
  CHECK(x[1] == doctest::Approx(0.5));

  const StepFactors f = step_factors(s, 0.3, 2.0);
  CHECK(f.decay[1] == doctest::Approx(std::exp(-4.0 * 0.15)));
  CHECK(f.weight[1] == doctest::Approx((1.0 - std::exp(-0.6)) / 4.0));
}

TEST_CASE("SimConfig grid") {
  SimConfig c = base_config(small_spec(2), zero_coefficients(1.0));
  CHECK(c.steps() == 64);
  c.h = 0.3;
  CHECK_THROWS_AS(c.steps(), std::invalid_argument);
}

TEST_CASE("pure stochastic convolution matches the stand-alone sampler") {
  const OperatorSpec s = small_spec(3);
  SimConfig c = base_config(s, zero_coefficients(1.0));
  c.M = 20000;
  c.h = 1.0 / 16.0;
  const PathEnsemble ens = simulate_mkv(c);
  std::vector<double> a(c.M), b(c.M);
  for (std::size_t i = 0; i < c.M; ++i) a[i] = norm(ens.at(i, ens.times() - 1));
  const RngStream rng(99, {0, 0, channel::sampling});
  for (std::size_t i = 0; i < c.M; ++i)
    b[i] = sample_convolution_increment(s, c.T, rng, i, NoiseProcess::slow).field.norm();
  const MeanEstimate ea = mean_stderr(a), eb = mean_stderr(b);
  CHECK(std::abs(ea.mean - eb.mean) <= 3.0 * std::hypot(ea.std_error, eb.std_error));
}

TEST_CASE("particle system edge cases") {
  OperatorSpec s = small_spec(2, 0.0);  // noise off
  CoefficientSet cs = zero_coefficients(1.0);
  cs.B = [](std::span<const double>, double mu_stat, std::span<double> out) {
    out[0] = mu_stat;
    out[1] = 0.0;
  };
  cs.lip_C = 1.0;
  SimConfig c = base_config(s, cs);
  c.M = 1;
  const PathEnsemble ens = simulate_mkv(c);
  CHECK(ens.at(0, ens.times() - 1)[0] == 0.0);
  CHECK(ens.particles() == 1);
  CHECK(ens.times() == 65);
}

TEST_CASE("linear drift converges at first order") {
  const OperatorSpec s = small_spec(1, 0.0);
  const double a = 0.5;
  SimConfig c = base_config(s, linear_b(a));
  c.M = 1;
  c.xi = SpectralField{1.0};
  const double exact = std::exp((a - 1.0) * c.T);
  std::vector<double> err;
  for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
    c.h = h;
    const PathEnsemble e = simulate_mkv(c);
    err.push_back(std::abs(e.at(0, e.times() - 1)[0] - exact));
  }
  CHECK(err[0] / err[1] == doctest::Approx(2.0).epsilon(0.15));
  CHECK(err[1] / err[2] == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("translation coupling bound") {
  const OperatorSpec s = small_spec(3);
  SimConfig c = base_config(s, zero_coefficients(1.0));
  const PathEnsemble zero = simulate_mkv(c);
  c.xi = SpectralField{0.5, -1.0, 0.25};
  const PathEnsemble moved = simulate_mkv(c);
  const double xi_norm = c.xi.norm();
  for (std::size_t j = 0; j < zero.times(); ++j) {
    const double w = wasserstein_exact(zero.law_flow().measures[j], moved.law_flow().measures[j], 1.0);
    CHECK(w <= std::exp(-s.lambda(1) * zero.law_flow().times[j]) * xi_norm * (1.0 + 1e-12));
  }
}

TEST_CASE("Picard iteration") {
  const OperatorSpec s = small_spec(4);
  SimConfig c = base_config(s, zero_coefficients(1.0));
  c.xi = SpectralField{1.0, 0.0, 0.0, 0.0};
  const PicardReport flat = picard_law_iteration(c, 3, 1.0);
  CHECK(flat.d[0] > 0.0);
  CHECK(flat.d[1] == 0.0);

  c.coeffs = make_builtin(BuiltinFamily{}, 4, 1.0);
  const PicardReport rep = picard_law_iteration(c, 6);
  CHECK(rep.lambda_weight == doctest::Approx(4.0 * c.coeffs.lip_C));
  const std::size_t stop = rep.floor_index.value_or(rep.d.size());
  for (std::size_t n = 0; n + 1 < stop; ++n) CHECK(rep.ratios[n] < 1.0);
  CHECK(rep.final_flow.size() == c.steps() + 1);
  CHECK_THROWS_AS(picard_law_iteration(c, 1), std::invalid_argument);
}

TEST_CASE("moment bound check") {
  OperatorSpec s = small_spec(2, 0.0);
  SimConfig c = base_config(s, zero_coefficients(1.0));
  c.xi = SpectralField{3.0, 4.0};
  const MomentReport det = moment_bound_check(simulate_mkv(c), 1.0, s);
  CHECK(det.sup == doctest::Approx(5.0));
  CHECK(det.finite);
  CHECK_THROWS_AS(moment_bound_check(simulate_mkv(c), s.alpha, s), std::invalid_argument);

  s = small_spec(4);
  c = base_config(s, make_builtin(BuiltinFamily{}, 4, 1.0));
  c.T = 4.0;
  c.h = 1.0 / 32.0;
  c.M = 500;
  CHECK(moment_bound_check(simulate_mkv(c), 1.0, s).stable);

  // shipped defaults
  s = small_spec(8);
  c = base_config(s, make_builtin(BuiltinFamily{}, 8, 1.0));
  c.h = 1.0 / 256.0;
  c.xi = SpectralField{0.5, 0.25, 0.125, 0.0625, 0.0, 0.0, 0.0, 0.0};
  c.M = 1000;
  const double a = moment_bound_check(simulate_mkv(c), 1.0, s).sup;
  c.M = 2000;
  const MomentReport big = moment_bound_check(simulate_mkv(c), 1.0, s);
  CHECK(big.finite);
  CHECK(std::abs(big.sup / a - 1.0) < 0.1);
}

TEST_CASE("single-scale validation") {
  OperatorSpec s = small_spec(2);
  SimConfig c = base_config(s, make_builtin(BuiltinFamily{}, 2, 1.0));
  CHECK_NOTHROW(require_single_scale(c));
  c.coeffs.lip_C = 0.01;
  CHECK_THROWS_AS(require_single_scale(c), AssumptionError);
}
