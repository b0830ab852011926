#include "mvlevy/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mvlevy/errors.hpp"
#include "mvlevy/parallel.hpp"
#include "mvlevy/stats.hpp"

namespace mvlevy {

namespace {

std::size_t ratio_steps(double big, double small, const char* what) {
  const double r = big / small;
  const auto n = static_cast<std::size_t>(std::llround(r));
  if (n == 0 || std::abs(static_cast<double>(n) - r) > 1e-9 * r)
    throw std::invalid_argument(std::string(what) + " is not a multiple of h_fast");
  return n;
}

}  // namespace

double MultiscaleConfig::block_length() const {
  if (delta > 0.0) return delta;
  return std::pow(epsilon, 1.0 / (1.0 + base.spec.theta));
}

SpectralField MultiscaleConfig::fast_initial() const {
  if (eta.empty()) return SpectralField(base.spec.n_modes);
  if (eta.size() != base.spec.n_modes) throw std::invalid_argument("MultiscaleConfig: eta length != n_modes");
  return eta;
}

std::size_t MultiscaleConfig::substeps() const {
  if (!(h_fast > 0.0)) throw std::invalid_argument("MultiscaleConfig: h_fast must be positive");
  return ratio_steps(base.h, h_fast, "macro step h");
}

std::size_t MultiscaleConfig::block_steps() const {
  if (!(h_fast > 0.0)) throw std::invalid_argument("MultiscaleConfig: h_fast must be positive");
  const double d = block_length();
  if (delta > 0.0) return ratio_steps(d, h_fast, "block length delta");
  // The default epsilon^{1/(1+theta)} is rounded to the nearest fast step.
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(d / h_fast)));
}

void validate_multiscale(const MultiscaleConfig& cfg, bool require_b3_bound) {
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(cfg.h_fast > 0.0)) throw std::invalid_argument("h_fast must be positive");
  if (cfg.h_fast > cfg.epsilon / 10.0 * (1.0 + 1e-12))
    throw std::invalid_argument("h_fast must be at most epsilon / 10");
  if (cfg.base.M == 0) throw std::invalid_argument("M must be positive");
  const std::size_t J = cfg.base.steps();
  const std::size_t S = cfg.substeps();
  const std::size_t d = cfg.block_steps();
  if (d > J * S) throw std::invalid_argument("block length delta exceeds T");
  (void)cfg.fast_initial();
  (void)cfg.base.initial();
  if (!cfg.base.coeffs.F || !cfg.base.coeffs.G) throw std::invalid_argument("coefficients F and G are required");

  const ValidationReport rep = validate_assumptions(cfg.base.spec, cfg.base.coeffs, cfg.base.seed);
  require_checks(rep, {"A1", "A3", "B1", "B2"});
  if (require_b3_bound)
    require_checks(rep, {"B3"});
  else
    require_dissipative(cfg.base.coeffs, cfg.base.spec);
}

nlohmann::json to_json(const StreamManifest& m) {
  return {{"seed", m.seed},
          {"replica", m.replica},
          {"particles", m.particles},
          {"modes", m.modes},
          {"h_fast", m.h_fast},
          {"fast_steps", m.fast_steps},
          {"slow_channel", m.slow_channel},
          {"fast_channel", m.fast_channel}};
}

namespace {

StreamManifest manifest_for(const MultiscaleConfig& cfg) {
  StreamManifest m;
  m.seed = cfg.base.seed;
  m.replica = cfg.base.replica;
  m.particles = cfg.base.M;
  m.modes = cfg.base.spec.n_modes;
  m.h_fast = cfg.h_fast;
  m.fast_steps = cfg.base.steps() * cfg.substeps();
  return m;
}

LawFlow macro_flow(const MultiscaleConfig& cfg, const EmpiricalMeasure& start) {
  LawFlow flow;
  const std::size_t J = cfg.base.steps();
  for (std::size_t j = 0; j <= J; ++j) flow.times.push_back(static_cast<double>(j) * cfg.base.h);
  flow.measures.reserve(J + 1);
  flow.measures.push_back(start);
  return flow;
}

struct Rates {
  StepFactors slow, fast;
  std::vector<double> slow_scales, fast_scales;
  StableSampler sampler;

  explicit Rates(const MultiscaleConfig& cfg)
      : slow(step_factors(cfg.base.spec, cfg.h_fast)),
        fast(step_factors(cfg.base.spec, cfg.h_fast, cfg.epsilon)),
        slow_scales(convolution_scales(cfg.base.spec, cfg.h_fast, NoiseProcess::slow)),
        fast_scales(convolution_scales(cfg.base.spec, cfg.h_fast, NoiseProcess::fast, cfg.epsilon)),
        sampler(cfg.base.spec.alpha) {}
};

RngStream stream(const MultiscaleConfig& cfg, std::size_t i, std::uint32_t ch) {
  return RngStream(cfg.base.seed, {cfg.base.replica, static_cast<std::uint32_t>(i), ch});
}

}  // namespace

SlowFastRun simulate_slow_fast(const MultiscaleConfig& cfg, SlowFastOptions opts) {
  validate_multiscale(cfg, false);
  const std::size_t N = cfg.base.spec.n_modes, M = cfg.base.M;
  const std::size_t J = cfg.base.steps(), S = cfg.substeps();
  const std::size_t total = J * S;
  const double p = cfg.base.spec.p;
  const Rates rates(cfg);
  const CoefficientSet& cs = cfg.base.coeffs;

  EmpiricalMeasure X = EmpiricalMeasure::dirac(cfg.base.initial(), M);
  EmpiricalMeasure Y = EmpiricalMeasure::dirac(cfg.fast_initial(), M);
  SlowFastRun run;
  run.manifest = manifest_for(cfg);
  LawFlow slow = macro_flow(cfg, X);
  LawFlow fast;
  if (opts.record_fast) fast = macro_flow(cfg, Y);

  const std::size_t stride = opts.snapshot_stride;
  if (stride > 0) {
    BlockSnapshots snaps;
    snaps.stride = stride;
    const std::size_t count = (total + stride - 1) / stride;
    snaps.x.assign(count, EmpiricalMeasure(M, N));
    snaps.mu_stat.assign(count, 0.0);
    run.snapshots = std::move(snaps);
  }

  for (std::size_t j = 0; j < J; ++j) {
    const double ms = p_moment(X, p);
    if (run.snapshots)
      for (std::size_t n = j * S; n < (j + 1) * S; ++n)
        if (n % stride == 0) run.snapshots->mu_stat[n / stride] = ms;
    parallel_for(M, cfg.base.threads, [&](std::size_t begin, std::size_t end) {
      std::vector<double> df(N), dg(N), ns(N), nf(N);
      for (std::size_t i = begin; i < end; ++i) {
        const RngStream rs = stream(cfg, i, channel::slow);
        const RngStream rf = stream(cfg, i, channel::fast);
        auto x = X.particle(i);
        auto y = Y.particle(i);
        for (std::size_t s = 0; s < S; ++s) {
          const std::size_t n = j * S + s;
          if (run.snapshots && n % stride == 0)
            std::copy(x.begin(), x.end(), run.snapshots->x[n / stride].particle(i).begin());
          cs.F(x, ms, y, df);
          cs.G(x, ms, y, dg);
          fill_increment(rates.sampler, rates.slow_scales, rs, n, ns);
          fill_increment(rates.sampler, rates.fast_scales, rf, n, nf);
          exp_euler_update(x, df, ns, rates.slow);
          exp_euler_update(y, dg, nf, rates.fast);
        }
      }
    });
    slow.measures.push_back(X);
    if (opts.record_fast) fast.measures.push_back(Y);
  }
  run.slow = PathEnsemble(std::move(slow));
  if (opts.record_fast) run.fast = PathEnsemble(std::move(fast));
  return run;
}

PathEnsemble simulate_auxiliary(const MultiscaleConfig& cfg, const BlockSnapshots& snapshots) {
  validate_multiscale(cfg, false);
  const std::size_t N = cfg.base.spec.n_modes, M = cfg.base.M;
  const std::size_t J = cfg.base.steps(), S = cfg.substeps();
  const std::size_t total = J * S;
  const std::size_t d = cfg.block_steps();
  const std::size_t stride = snapshots.stride;
  if (stride == 0 || d % stride != 0)
    throw std::invalid_argument("simulate_auxiliary: block length is not a multiple of the snapshot stride");
  const std::size_t needed = (total - 1) / d * d / stride + 1;
  if (snapshots.x.size() < needed || snapshots.mu_stat.size() < needed)
    throw std::invalid_argument("simulate_auxiliary: snapshots do not cover the horizon");
  for (const auto& m : snapshots.x)
    if (m.size() != M || m.modes() != N) throw std::invalid_argument("simulate_auxiliary: snapshot shape mismatch");

  const Rates rates(cfg);
  const CoefficientSet& cs = cfg.base.coeffs;
  EmpiricalMeasure Yh = EmpiricalMeasure::dirac(cfg.fast_initial(), M);
  LawFlow flow = macro_flow(cfg, Yh);
  for (std::size_t j = 0; j < J; ++j) {
    parallel_for(M, cfg.base.threads, [&](std::size_t begin, std::size_t end) {
      std::vector<double> dg(N), nf(N);
      for (std::size_t i = begin; i < end; ++i) {
        const RngStream rf = stream(cfg, i, channel::fast);
        auto y = Yh.particle(i);
        for (std::size_t s = 0; s < S; ++s) {
          const std::size_t n = j * S + s;
          const std::size_t idx = n / d * d / stride;
          cs.G(snapshots.x[idx].particle(i), snapshots.mu_stat[idx], y, dg);
          fill_increment(rates.sampler, rates.fast_scales, rf, n, nf);
          exp_euler_update(y, dg, nf, rates.fast);
        }
      }
    });
    flow.measures.push_back(Yh);
  }
  return PathEnsemble(std::move(flow));
}

PathEnsemble simulate_averaged(const MultiscaleConfig& cfg, const AveragedDrift& drift,
                               const std::optional<StreamManifest>& expected) {
  validate_multiscale(cfg, false);
  const StreamManifest mine = manifest_for(cfg);
  if (expected && *expected != mine)
    throw std::invalid_argument("simulate_averaged: slow streams differ from the paired slow-fast run");
  const std::size_t N = cfg.base.spec.n_modes, M = cfg.base.M;
  const std::size_t J = cfg.base.steps(), S = cfg.substeps();
  const double p = cfg.base.spec.p;
  const Rates rates(cfg);

  EmpiricalMeasure X = EmpiricalMeasure::dirac(cfg.base.initial(), M);
  LawFlow flow = macro_flow(cfg, X);
  for (std::size_t j = 0; j < J; ++j) {
    const double ms = p_moment(X, p);
    parallel_for(M, cfg.base.threads, [&](std::size_t begin, std::size_t end) {
      std::vector<double> df(N), ns(N);
      for (std::size_t i = begin; i < end; ++i) {
        const RngStream rs = stream(cfg, i, channel::slow);
        auto x = X.particle(i);
        for (std::size_t s = 0; s < S; ++s) {
          const std::size_t n = j * S + s;
          drift.evaluate(x, ms, df);
          fill_increment(rates.sampler, rates.slow_scales, rs, n, ns);
          exp_euler_update(x, df, ns, rates.slow);
        }
      }
    });
    flow.measures.push_back(X);
  }
  return PathEnsemble(std::move(flow));
}

StrongError strong_error(const MultiscaleConfig& cfg, const AveragedDrift& drift, double m) {
  const OperatorSpec& spec = cfg.base.spec;
  if (!cfg.base.coeffs.F_bounded)
    throw AssumptionError("B3", "F is not declared bounded; the strong error estimator is refused");
  if (!(m >= spec.p && m < spec.alpha)) throw std::invalid_argument("strong_error: m outside [p, alpha)");
  validate_multiscale(cfg, true);

  SlowFastOptions opts;
  opts.record_fast = false;
  const SlowFastRun sf = simulate_slow_fast(cfg, opts);
  const PathEnsemble avg = simulate_averaged(cfg, drift, sf.manifest);

  const std::size_t M = cfg.base.M, N = spec.n_modes;
  StrongError out;
  out.per_particle.assign(M, 0.0);
  for (std::size_t j = 0; j < sf.slow.times(); ++j) {
    for (std::size_t i = 0; i < M; ++i) {
      const auto a = sf.slow.at(i, j);
      const auto b = avg.at(i, j);
      double s = 0.0;
      for (std::size_t k = 0; k < N; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
      out.per_particle[i] = std::max(out.per_particle[i], std::sqrt(s));
    }
  }
  std::vector<double> powed(M);
  for (std::size_t i = 0; i < M; ++i) powed[i] = std::pow(out.per_particle[i], m);
  const MeanEstimate e = mean_stderr(powed);
  out.error = std::pow(e.mean, 1.0 / m);
  // Delta method for g(v) = v^{1/m}.
  out.std_error = e.mean > 0.0 ? out.error / (m * e.mean) * e.std_error : 0.0;
  return out;
}

}  // namespace mvlevy
