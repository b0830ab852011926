#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>

#include "mvlevy/errors.hpp"
#include "mvlevy/multiscale.hpp"
#include "mvlevy/parallel.hpp"
#include "mvlevy/stable_smoothing.hpp"
#include "mvlevy/stats.hpp"

namespace mvlevy {

std::string to_string(FbarMode mode) {
  switch (mode) {
    case FbarMode::analytic_linear: return "analytic_linear";
    case FbarMode::ergodic_estimate: return "ergodic_estimate";
    case FbarMode::stable_quadrature: return "stable_quadrature";
  }
  return "unknown";
}

FbarMode parse_fbar_mode(const std::string& name) {
  if (name == "analytic_linear") return FbarMode::analytic_linear;
  if (name == "ergodic_estimate") return FbarMode::ergodic_estimate;
  if (name == "stable_quadrature") return FbarMode::stable_quadrature;
  throw std::invalid_argument("unknown fbar mode '" + name + "'");
}

namespace {

std::size_t step_count(double T, double h, const char* what) {
  if (!(h > 0.0) || !(T >= 0.0)) throw std::invalid_argument(std::string(what) + ": need h > 0 and T >= 0");
  return static_cast<std::size_t>(std::llround(T / h));
}

// One frozen-equation path: y <- e^{-lambda h} y + w G(x, ms, y) + noise.
struct FrozenKernel {
  const OperatorSpec& spec;
  const CoefficientSet& coeffs;
  StepFactors factors;
  std::vector<double> scales;
  StableSampler sampler;

  FrozenKernel(const OperatorSpec& s, const CoefficientSet& c, double h)
      : spec(s),
        coeffs(c),
        factors(step_factors(s, h)),
        scales(convolution_scales(s, h, NoiseProcess::fast, 1.0)),
        sampler(s.alpha) {}

  void step(std::span<const double> x, double ms, std::span<double> y, const RngStream& rng, std::uint64_t n,
            std::span<double> drift, std::span<double> noise) const {
    coeffs.G(x, ms, y, drift);
    fill_increment(sampler, scales, rng, n, noise);
    exp_euler_update(y, drift, noise, factors);
  }
};

}  // namespace

PathEnsemble simulate_frozen(const FrozenInput& input, double T_end, double h, std::size_t n_replicas,
                             const OperatorSpec& spec, const CoefficientSet& coeffs, std::uint64_t seed,
                             std::size_t record_every, int threads) {
  require_dissipative(coeffs, spec);
  if (n_replicas == 0) throw std::invalid_argument("simulate_frozen: n_replicas must be positive");
  if (record_every == 0) throw std::invalid_argument("simulate_frozen: record_every must be positive");
  const std::size_t n = spec.n_modes;
  if (input.x.size() != n) throw std::invalid_argument("simulate_frozen: x length != n_modes");
  const SpectralField y0 = input.y0.empty() ? SpectralField(n) : input.y0;
  if (y0.size() != n) throw std::invalid_argument("simulate_frozen: y0 length != n_modes");
  if (!(input.mu_stat >= 0.0)) throw std::invalid_argument("simulate_frozen: mu_stat must be >= 0");
  const std::size_t steps = step_count(T_end, h, "simulate_frozen");

  const FrozenKernel kernel(spec, coeffs, h);
  LawFlow flow;
  for (std::size_t j = 0; j <= steps; j += record_every) {
    flow.times.push_back(static_cast<double>(j) * h);
    flow.measures.emplace_back(n_replicas, n);
  }
  parallel_for(n_replicas, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> y(n), drift(n), noise(n);
    for (std::size_t r = begin; r < end; ++r) {
      const RngStream rng(seed, {0, static_cast<std::uint32_t>(r), channel::frozen});
      std::copy(y0.coeffs().begin(), y0.coeffs().end(), y.begin());
      for (std::size_t j = 0; j <= steps; ++j) {
        if (j % record_every == 0) std::copy(y.begin(), y.end(), flow.measures[j / record_every].particle(r).begin());
        if (j < steps) kernel.step(input.x.view(), input.mu_stat, y, rng, j, drift, noise);
      }
    }
  });
  return PathEnsemble(std::move(flow));
}

struct AveragedDrift::Impl {
  FbarMode mode;
  OperatorSpec spec;
  CoefficientSet coeffs;
  ErgodicSettings settings;
  EffectiveConstants ec;
  std::vector<StableTanh> phi;   // stable_quadrature, one per active mode
  std::vector<double> shift_div;  // lambda_k - c
  mutable std::mutex mutex;
  mutable std::map<std::vector<std::int64_t>, std::vector<double>> cache;

  FbarEstimate ergodic(std::span<const double> x, double ms) const {
    const std::size_t n = spec.n_modes;
    const double tb = settings.burn_in > 0.0 ? settings.burn_in : 8.0 / ec.gap;
    const double ta = settings.window > 0.0 ? settings.window : 64.0 / ec.gap;
    const std::size_t nb = step_count(tb, settings.h, "ergodic_estimate");
    const std::size_t na = std::max<std::size_t>(1, step_count(ta, settings.h, "ergodic_estimate"));
    const FrozenKernel kernel(spec, coeffs, settings.h);
    const std::size_t paths = settings.n_paths;
    std::vector<double> path_means(paths * n);
    parallel_for(paths, settings.threads, [&](std::size_t begin, std::size_t end) {
      std::vector<double> y(n, 0.0), drift(n), noise(n), f(n);
      for (std::size_t p = begin; p < end; ++p) {
        // Common random numbers: the same streams for every (x, mu_stat).
        const RngStream rng(settings.seed, {0, static_cast<std::uint32_t>(p), channel::frozen});
        std::fill(y.begin(), y.end(), 0.0);
        double* mean = path_means.data() + p * n;
        for (std::size_t j = 0; j < nb + na; ++j) {
          if (j >= nb) {
            coeffs.F(x, ms, y, f);
            const double cnt = static_cast<double>(j - nb + 1);
            // Running mean: a constant integrand is returned exactly.
            for (std::size_t k = 0; k < n; ++k) mean[k] += (f[k] - mean[k]) / cnt;
          }
          kernel.step(x, ms, y, rng, j, drift, noise);
        }
      }
    });
    FbarEstimate est{SpectralField(n), SpectralField(n)};
    std::vector<double> m2(n, 0.0);
    for (std::size_t p = 0; p < paths; ++p) {
      const double cnt = static_cast<double>(p + 1);
      for (std::size_t k = 0; k < n; ++k) {
        const double v = path_means[p * n + k];
        const double d = v - est.value[k];
        est.value[k] += d / cnt;
        m2[k] += d * (v - est.value[k]);
      }
    }
    if (paths > 1)
      for (std::size_t k = 0; k < n; ++k)
        est.std_error[k] = std::sqrt(m2[k] / static_cast<double>(paths - 1) / static_cast<double>(paths));
    return est;
  }

  void closed_form(std::span<const double> x, double ms, std::span<double> out) const {
    const BuiltinFamily& fam = *coeffs.family;
    if (mode == FbarMode::analytic_linear) {
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = fam.a * x[k] / shift_div[k];
      return;
    }
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t k = 0; k < phi.size(); ++k) {
      const double m = fam.a * std::tanh(x[k]) / shift_div[k];
      out[k] = fam.a * phi[k](x[k] + m);
    }
    out[0] += fam.b_mu * std::min(1.0, ms);
  }

  std::vector<std::int64_t> key(std::span<const double> x, double ms) const {
    std::vector<std::int64_t> q(x.size() + 1);
    for (std::size_t k = 0; k < x.size(); ++k) q[k] = std::llround(x[k] / settings.quantum);
    q.back() = std::llround(ms / settings.quantum);
    return q;
  }
};

AveragedDrift::AveragedDrift(FbarMode mode, const OperatorSpec& spec, const CoefficientSet& coeffs,
                             ErgodicSettings settings)
    : impl_(std::make_unique<Impl>()) {
  Impl& im = *impl_;
  im.mode = mode;
  im.spec = spec;
  im.coeffs = coeffs;
  im.settings = settings;
  im.ec = effective_constants(coeffs, spec);
  require_dissipative(coeffs, spec);
  if (!(settings.quantum > 0.0)) throw std::invalid_argument("AveragedDrift: quantum must be positive");
  if (settings.n_paths == 0) throw std::invalid_argument("AveragedDrift: n_paths must be positive");
  if (!coeffs.F || !coeffs.G) throw std::invalid_argument("AveragedDrift: F and G are required");

  const bool linear = coeffs.family && coeffs.family->variant == BuiltinFamily::Variant::linear_test;
  const bool smooth = coeffs.family && coeffs.family->variant == BuiltinFamily::Variant::bounded_smooth;
  if (mode == FbarMode::analytic_linear && !linear)
    throw std::invalid_argument("analytic_linear mode requires the linear_test coefficients");
  if (mode == FbarMode::stable_quadrature && !smooth)
    throw std::invalid_argument("stable_quadrature mode requires the bounded_smooth coefficients");

  if (mode != FbarMode::ergodic_estimate) {
    const double c = coeffs.family->c;
    for (std::size_t k = 1; k <= spec.n_modes; ++k) im.shift_div.push_back(spec.lambda(k) - c);
  }
  if (mode == FbarMode::stable_quadrature) {
    for (std::size_t k = 1; k <= coeffs.family->K; ++k) {
      const double s = spec.gamma(k) * std::pow(1.0 / (spec.alpha * im.shift_div[k - 1]), 1.0 / spec.alpha);
      im.phi.emplace_back(s, spec.alpha);
    }
  }
}

AveragedDrift::~AveragedDrift() = default;
AveragedDrift::AveragedDrift(AveragedDrift&&) noexcept = default;
AveragedDrift& AveragedDrift::operator=(AveragedDrift&&) noexcept = default;

FbarMode AveragedDrift::mode() const noexcept { return impl_->mode; }
const ErgodicSettings& AveragedDrift::settings() const noexcept { return impl_->settings; }

std::size_t AveragedDrift::cache_size() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->cache.size();
}

FbarEstimate AveragedDrift::estimate(std::span<const double> x, double mu_stat) const {
  const std::size_t n = impl_->spec.n_modes;
  if (x.size() != n) throw std::invalid_argument("AveragedDrift: x length != n_modes");
  if (impl_->mode == FbarMode::ergodic_estimate) return impl_->ergodic(x, mu_stat);
  FbarEstimate est{SpectralField(n), SpectralField(n)};
  impl_->closed_form(x, mu_stat, est.value.view());
  return est;
}

void AveragedDrift::evaluate(std::span<const double> x, double mu_stat, std::span<double> out) const {
  const Impl& im = *impl_;
  if (im.mode != FbarMode::ergodic_estimate) {
    im.closed_form(x, mu_stat, out);
    return;
  }
  auto key = im.key(x, mu_stat);
  {
    std::lock_guard lock(im.mutex);
    if (auto it = im.cache.find(key); it != im.cache.end()) {
      std::copy(it->second.begin(), it->second.end(), out.begin());
      return;
    }
  }
  // Evaluate at the grid point so the cached value does not depend on which
  // caller filled it.
  std::vector<double> xq(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) xq[k] = static_cast<double>(key[k]) * im.settings.quantum;
  const double mq = static_cast<double>(key.back()) * im.settings.quantum;
  const FbarEstimate est = im.ergodic(xq, mq);
  std::copy(est.value.coeffs().begin(), est.value.coeffs().end(), out.begin());
  std::lock_guard lock(im.mutex);
  im.cache.insert_or_assign(std::move(key), est.value.coeffs());
}

FbarEstimate estimate_fbar(const AveragedDrift& drift, const FrozenInput& input) {
  if (!(input.mu_stat >= 0.0)) throw std::invalid_argument("estimate_fbar: mu_stat must be >= 0");
  return drift.estimate(input.x.view(), input.mu_stat);
}

DecayReport ergodicity_decay(const FrozenInput& input, const OperatorSpec& spec, const CoefficientSet& coeffs,
                             std::span<const double> t_grid, std::size_t n_replicas, std::uint64_t seed, double h,
                             int threads) {
  require_dissipative(coeffs, spec);
  if (t_grid.empty()) throw std::invalid_argument("ergodicity_decay: empty time grid");
  if (n_replicas < 2) throw std::invalid_argument("ergodicity_decay: need at least two replicas");
  if (!std::is_sorted(t_grid.begin(), t_grid.end()) || t_grid.front() < 0.0)
    throw std::invalid_argument("ergodicity_decay: time grid must be nondecreasing and >= 0");
  const std::size_t n = spec.n_modes;
  if (input.x.size() != n) throw std::invalid_argument("ergodicity_decay: x length != n_modes");
  const SpectralField y0 = input.y0.empty() ? SpectralField(n) : input.y0;
  const double ms = input.mu_stat;

  DecayReport rep;
  rep.gap = effective_constants(coeffs, spec).gap;
  std::vector<std::size_t> at;
  for (double t : t_grid) at.push_back(step_count(t, h, "ergodicity_decay"));
  const std::size_t burn = step_count(16.0 / rep.gap, h, "ergodicity_decay");
  const FrozenKernel kernel(spec, coeffs, h);

  const std::size_t nt = t_grid.size();
  // diff[(r * nt + j) * n + k] = F_k(Y_t^y) - F_k(Y_t^stat) for replica r.
  std::vector<double> diff(n_replicas * nt * n);
  parallel_for(n_replicas, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> y(n), ys(n), drift(n), noise(n), f1(n), f2(n);
    for (std::size_t r = begin; r < end; ++r) {
      const auto rid = static_cast<std::uint32_t>(r);
      const RngStream burn_rng(seed, {1, rid, channel::frozen});
      const RngStream rng(seed, {0, rid, channel::frozen});
      std::copy(y0.coeffs().begin(), y0.coeffs().end(), ys.begin());
      for (std::size_t j = 0; j < burn; ++j) kernel.step(input.x.view(), ms, ys, burn_rng, j, drift, noise);
      std::copy(y0.coeffs().begin(), y0.coeffs().end(), y.begin());
      std::size_t next = 0;
      for (std::size_t j = 0; next < nt; ++j) {
        while (next < nt && at[next] == j) {
          coeffs.F(input.x.view(), ms, y, f1);
          coeffs.F(input.x.view(), ms, ys, f2);
          for (std::size_t k = 0; k < n; ++k) diff[(r * nt + next) * n + k] = f1[k] - f2[k];
          ++next;
        }
        if (next == nt) break;
        kernel.step(input.x.view(), ms, y, rng, j, drift, noise);
        kernel.step(input.x.view(), ms, ys, rng, j, drift, noise);
      }
    }
  });

  std::vector<double> col(n_replicas);
  for (std::size_t j = 0; j < nt; ++j) {
    double v2 = 0.0, se2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t r = 0; r < n_replicas; ++r) col[r] = diff[(r * nt + j) * n + k];
      const MeanEstimate e = mean_stderr(col);
      v2 += e.mean * e.mean;
      se2 += e.std_error * e.std_error;
    }
    rep.t.push_back(t_grid[j]);
    rep.gap_value.push_back(std::sqrt(v2));
    rep.std_error.push_back(std::sqrt(se2));
  }

  std::vector<double> lt, lv, w;
  for (std::size_t j = 0; j < nt; ++j) {
    const double v = rep.gap_value[j], se = rep.std_error[j];
    if (!(v > 3.0 * se) || !(v > 0.0)) continue;
    lt.push_back(rep.t[j]);
    lv.push_back(std::log(v));
    const double rel = std::max(se / v, 1e-12);
    w.push_back(1.0 / (rel * rel));
  }
  rep.points_used = lt.size();
  rep.signal = lt.size() >= 2 && lt.front() < lt.back();
  if (rep.signal) {
    const LineFit fit = fit_line(lt, lv, w);
    rep.fitted_rate = -fit.slope;
    rep.rate_stderr = fit.slope_stderr;
    rep.envelope_C = std::exp(fit.intercept) * 1.05;
    rep.envelope_ok = true;
    for (std::size_t j = 0; j < nt; ++j)
      if (rep.gap_value[j] > rep.envelope_C * std::exp(-rep.gap * rep.t[j]) + 3.0 * rep.std_error[j])
        rep.envelope_ok = false;
  }
  return rep;
}

}  // namespace mvlevy
