#include "mvlevy/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mvlevy/errors.hpp"
#include "mvlevy/parallel.hpp"
#include "mvlevy/stats.hpp"

namespace mvlevy {

std::size_t SimConfig::steps() const {
  if (!(h > 0.0) || !(T > 0.0)) throw std::invalid_argument("SimConfig: need T > 0 and h > 0");
  const double r = T / h;
  const auto J = static_cast<std::size_t>(std::llround(r));
  if (J == 0 || std::abs(static_cast<double>(J) * h - T) > 1e-9 * T)
    throw std::invalid_argument("SimConfig: h does not divide T");
  return J;
}

SpectralField SimConfig::initial() const {
  if (xi.empty()) return SpectralField(spec.n_modes);
  if (xi.size() != spec.n_modes) throw std::invalid_argument("SimConfig: xi length != n_modes");
  return xi;
}

StepFactors step_factors(const OperatorSpec& spec, double h, double time_scale) {
  if (!(h > 0.0)) throw std::invalid_argument("step length must be positive");
  if (!(time_scale > 0.0)) throw std::invalid_argument("time scale must be positive");
  StepFactors f;
  f.decay.resize(spec.n_modes);
  f.weight.resize(spec.n_modes);
  for (std::size_t k = 0; k < spec.n_modes; ++k) {
    const double lam = spec.lambda(k + 1);
    const double x = lam * h / time_scale;
    f.decay[k] = std::exp(-x);
    f.weight[k] = -std::expm1(-x) / lam;
  }
  return f;
}

SpectralField step_exponential_euler(const SpectralField& u, const SpectralField& drift, double h,
                                     const OperatorSpec& spec, const ConvolutionIncrement& noise_inc) {
  if (!(h > 0.0)) throw std::invalid_argument("step_exponential_euler: h must be positive");
  const std::size_t n = spec.n_modes;
  if (u.size() != n || drift.size() != n || noise_inc.field.size() != n)
    throw std::invalid_argument("step_exponential_euler: field length != n_modes");
  const StepFactors f = step_factors(spec, h);
  SpectralField out = u;
  exp_euler_update(out.view(), drift.view(), noise_inc.field.view(), f);
  return out;
}

void require_single_scale(const SimConfig& cfg) {
  const ValidationReport rep = validate_assumptions(cfg.spec, cfg.coeffs, cfg.seed);
  require_checks(rep, {"A1", "A2", "A3"});
}

namespace {

struct Stepper {
  const SimConfig& cfg;
  std::size_t n;
  StepFactors factors;
  std::vector<double> scales;
  StableSampler sampler;

  explicit Stepper(const SimConfig& c)
      : cfg(c),
        n(c.spec.n_modes),
        factors(step_factors(c.spec, c.h)),
        scales(convolution_scales(c.spec, c.h, NoiseProcess::slow)),
        sampler(c.spec.alpha) {}

  // Advances every particle of `cur` one step into `next` with law statistic ms.
  void advance(const EmpiricalMeasure& cur, EmpiricalMeasure& next, std::size_t step, double ms) const {
    parallel_for(cur.size(), cfg.threads, [&](std::size_t begin, std::size_t end) {
      std::vector<double> drift(n), noise(n);
      for (std::size_t i = begin; i < end; ++i) {
        const RngStream rng(cfg.seed, {cfg.replica, static_cast<std::uint32_t>(i), channel::slow});
        cfg.coeffs.B(cur.particle(i), ms, drift);
        fill_increment(sampler, scales, rng, step, noise);
        auto u = next.particle(i);
        std::copy(cur.particle(i).begin(), cur.particle(i).end(), u.begin());
        exp_euler_update(u, drift, noise, factors);
      }
    });
  }
};

LawFlow start_flow(const SimConfig& cfg, std::size_t J) {
  LawFlow flow;
  flow.times.reserve(J + 1);
  flow.measures.reserve(J + 1);
  for (std::size_t j = 0; j <= J; ++j) flow.times.push_back(static_cast<double>(j) * cfg.h);
  flow.measures.push_back(EmpiricalMeasure::dirac(cfg.initial(), cfg.M));
  return flow;
}

void check_sim(const SimConfig& cfg) {
  if (cfg.M == 0) throw std::invalid_argument("SimConfig: M must be positive");
  if (!cfg.coeffs.B) throw std::invalid_argument("SimConfig: coefficient B is missing");
  if (cfg.M > std::numeric_limits<std::uint32_t>::max()) throw std::invalid_argument("SimConfig: M too large");
}

}  // namespace

PathEnsemble simulate_mkv(const SimConfig& cfg) {
  check_sim(cfg);
  require_single_scale(cfg);
  const std::size_t J = cfg.steps();
  const Stepper stepper(cfg);
  LawFlow flow = start_flow(cfg, J);
  for (std::size_t j = 0; j < J; ++j) {
    const EmpiricalMeasure& cur = flow.measures.back();
    const double ms = p_moment(cur, cfg.spec.p);
    EmpiricalMeasure next(cfg.M, cfg.spec.n_modes);
    stepper.advance(cur, next, j, ms);
    flow.measures.push_back(std::move(next));
  }
  return PathEnsemble(std::move(flow));
}

PathEnsemble solve_frozen_law(const SimConfig& cfg, std::span<const double> mu_stat_per_time) {
  check_sim(cfg);
  const std::size_t J = cfg.steps();
  if (mu_stat_per_time.size() < J) throw std::invalid_argument("solve_frozen_law: too few law statistics");
  const Stepper stepper(cfg);
  LawFlow flow = start_flow(cfg, J);
  for (std::size_t j = 0; j < J; ++j) {
    EmpiricalMeasure next(cfg.M, cfg.spec.n_modes);
    stepper.advance(flow.measures.back(), next, j, mu_stat_per_time[j]);
    flow.measures.push_back(std::move(next));
  }
  return PathEnsemble(std::move(flow));
}

PicardReport picard_law_iteration(const SimConfig& cfg, std::size_t n_iters, double lambda_weight) {
  if (n_iters < 2) throw std::invalid_argument("picard_law_iteration: n_iters must be at least 2");
  check_sim(cfg);
  require_single_scale(cfg);
  const std::size_t J = cfg.steps();

  PicardReport rep;
  rep.lambda_weight = lambda_weight > 0.0 ? lambda_weight : 4.0 * cfg.coeffs.lip_C;
  rep.note =
      "noise is reused across stages, so d_n tracks the law update of the M-particle map; its contraction "
      "and the particle approximation error are not separated";

  LawFlow cur = start_flow(cfg, J);
  for (std::size_t j = 0; j < J; ++j) cur.measures.push_back(cur.measures.front());

  const double p = cfg.spec.p;
  std::vector<double> stats(J + 1);
  for (std::size_t n = 0; n < n_iters; ++n) {
    for (std::size_t j = 0; j <= J; ++j) stats[j] = p_moment(cur.measures[j], p);
    LawFlow next = solve_frozen_law(cfg, stats).law_flow();
    rep.d.push_back(dT_metric(next, cur, rep.lambda_weight, p));
    cur = std::move(next);
  }

  // Below this level the differences are rounding noise.
  const double floor_level = 1e-10 * std::max(rep.d.front(), std::numeric_limits<double>::min());
  for (std::size_t n = 0; n < rep.d.size(); ++n) {
    if (n + 1 < rep.d.size()) rep.ratios.push_back(rep.d[n] > 0.0 ? rep.d[n + 1] / rep.d[n] : 0.0);
    if (!rep.floor_index && rep.d[n] <= floor_level) {
      rep.floor_index = n;
      std::ostringstream os;
      os << "d_" << n << " = " << rep.d[n] << " reached the floor (<= 1e-10 d_0); later ratios are not meaningful";
      rep.warnings.push_back(os.str());
    }
    if (n > 0 && !rep.floor_index && rep.d[n] >= rep.d[n - 1]) {
      std::ostringstream os;
      os << "d_" << n << " = " << rep.d[n] << " did not decrease (d_" << n - 1 << " = " << rep.d[n - 1] << ")";
      rep.warnings.push_back(os.str());
    }
  }
  rep.final_flow = std::move(cur);
  return rep;
}

MomentReport moment_bound_check(const PathEnsemble& ensemble, double m, const OperatorSpec& spec) {
  if (!(m >= spec.p && m < spec.alpha)) throw std::invalid_argument("moment_bound_check: m outside [p, alpha)");
  const LawFlow& flow = ensemble.law_flow();
  if (flow.times.empty()) throw std::invalid_argument("moment_bound_check: empty ensemble");
  MomentReport rep;
  rep.m = m;
  for (const auto& mu : flow.measures) {
    const double v = p_moment(mu, m);
    rep.moments.push_back(v);
    rep.finite = rep.finite && std::isfinite(v);
    rep.sup = std::max(rep.sup, v);
  }
  const std::size_t half = flow.times.size() / 2;
  if (flow.times.size() - half >= 3 && rep.finite) {
    std::span<const double> t(flow.times.data() + half, flow.times.size() - half);
    std::span<const double> v(rep.moments.data() + half, rep.moments.size() - half);
    const LineFit fit = fit_line(t, v);
    rep.trend_slope = fit.slope;
    rep.trend_stderr = fit.slope_stderr;
    double level = 0.0;
    for (double x : v) level += x;
    level /= static_cast<double>(v.size());
    const double rise = fit.slope * (t.back() - t.front());
    // Growth counts only when it is both material (10% of the level) and significant.
    rep.stable = !(rise > 0.1 * level && fit.slope > 3.0 * fit.slope_stderr);
  }
  rep.stable = rep.stable && rep.finite;
  return rep;
}

}  // namespace mvlevy
