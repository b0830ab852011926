#include "mvlevy/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mvlevy/digest.hpp"
#include "mvlevy/stats.hpp"

namespace mvlevy {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::size_t steps_of(double span, double h, const char* what) {
  const double r = span / h;
  const auto n = static_cast<std::size_t>(std::llround(r));
  if (n == 0 || std::abs(static_cast<double>(n) - r) > 1e-9 * r)
    throw std::invalid_argument(std::string(what) + " is not a multiple of the macro step h");
  return n;
}

double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

// (1/T) sum_{j=1}^{J} h [E|d_j|^m]^{1/m} with a linearized per-particle
// contribution for the standard error. d(i, j) is the distance at t_j.
template <class Dist>
GridPoint time_integral(std::size_t M, std::size_t J, double h, double T, double m, Dist d) {
  std::vector<double> e(J + 1, 0.0);
  std::vector<double> vals(M * (J + 1));
  for (std::size_t j = 1; j <= J; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      const double v = std::pow(d(i, j), m);
      vals[i * (J + 1) + j] = v;
      s += v;
    }
    e[j] = s / static_cast<double>(M);
  }
  GridPoint gp;
  std::vector<double> contrib(M, 0.0);
  for (std::size_t j = 1; j <= J; ++j) {
    if (e[j] <= 0.0) continue;
    gp.error += h * std::pow(e[j], 1.0 / m) / T;
    const double lin = h / T * std::pow(e[j], 1.0 / m - 1.0) / m;
    for (std::size_t i = 0; i < M; ++i) contrib[i] += lin * vals[i * (J + 1) + j];
  }
  gp.std_error = mean_stderr(contrib).std_error;
  gp.floor_flag = !(gp.error > 3.0 * gp.std_error);
  return gp;
}

void check_geometric(std::span<const double> grid, const char* what) {
  if (grid.empty()) throw std::invalid_argument(std::string(what) + ": empty grid");
  for (double v : grid)
    if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + ": grid values must be positive");
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

void fit_loglog(ExperimentResult& result) {
  std::vector<double> x, y, w;
  for (const auto& g : result.grid) {
    if (g.floor_flag || !(g.error > 0.0) || !(g.param > 0.0)) continue;
    x.push_back(std::log(g.param));
    y.push_back(std::log(g.error));
    const double rel = std::max(g.std_error / g.error, 1e-12);
    w.push_back(1.0 / (rel * rel));
  }
  result.fitted_slope.reset();
  result.fit_r2.reset();
  result.slope_stderr.reset();
  if (x.size() < 3) {
    result.flags.push_back("degenerate");
    return;
  }
  const LineFit fit = fit_line(x, y, w);
  result.fitted_slope = fit.slope;
  result.fit_r2 = fit.r2;
  result.slope_stderr = fit.slope_stderr;
}

std::optional<double> slope_without_noisiest(const ExperimentResult& result) {
  ExperimentResult copy = result;
  std::size_t worst = copy.grid.size();
  double worst_rel = -1.0;
  std::size_t usable = 0;
  for (std::size_t i = 0; i < copy.grid.size(); ++i) {
    const auto& g = copy.grid[i];
    if (g.floor_flag || !(g.error > 0.0)) continue;
    ++usable;
    const double rel = g.std_error / g.error;
    if (rel > worst_rel) {
      worst_rel = rel;
      worst = i;
    }
  }
  if (usable < 4) return std::nullopt;
  copy.grid.erase(copy.grid.begin() + static_cast<std::ptrdiff_t>(worst));
  fit_loglog(copy);
  return copy.fitted_slope;
}

ExperimentResult rate_study(const MultiscaleConfig& tmpl, const AveragedDrift& drift, std::span<const double> eps_grid,
                            double m, double h_fast_ratio) {
  check_geometric(eps_grid, "rate_study");
  const auto t0 = Clock::now();
  ExperimentResult res;
  res.kind = "rate-study";
  res.seeds = {tmpl.base.seed};
  const double theta = tmpl.base.spec.theta;
  res.theoretical_slope = theta / (2.0 * (1.0 + theta));
  json points = json::array();
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    MultiscaleConfig cfg = tmpl;
    cfg.epsilon = eps_grid[i];
    cfg.h_fast = h_fast_ratio * eps_grid[i];
    cfg.delta = 0.0;
    cfg.base.replica = tmpl.base.replica + i;
    const StrongError se = strong_error(cfg, drift, m);
    GridPoint gp{eps_grid[i], se.error, se.std_error, false};
    gp.floor_flag = !(gp.error > 3.0 * gp.std_error);
    res.grid.push_back(gp);
    points.push_back({{"epsilon", eps_grid[i]},
                      {"replica", cfg.base.replica},
                      {"h_fast", cfg.h_fast},
                      {"delta_steps", cfg.block_steps()}});
  }
  fit_loglog(res);
  // Errors must shrink with epsilon outside the floor.
  std::vector<GridPoint> live;
  for (const auto& g : res.grid)
    if (!g.floor_flag) live.push_back(g);
  std::sort(live.begin(), live.end(), [](const GridPoint& a, const GridPoint& b) { return a.param > b.param; });
  for (std::size_t i = 1; i < live.size(); ++i)
    if (!(live[i].error < live[i - 1].error)) {
      res.flags.push_back("non_monotone");
      break;
    }
  for (std::size_t i = 0; i < res.grid.size(); ++i)
    if (res.grid[i].floor_flag) res.flags.push_back("noise_floor:" + fmt17(res.grid[i].param));
  res.metrics["points"] = points;
  res.metrics["m"] = m;
  res.metrics["fbar_mode"] = to_string(drift.mode());
  res.runtime_s = seconds_since(t0);
  return res;
}

ExperimentResult hoelder_study(const MultiscaleConfig& cfg, std::span<const double> delta_grid, double m) {
  check_geometric(delta_grid, "hoelder_study");
  const auto t0 = Clock::now();
  SlowFastOptions opts;
  opts.record_fast = false;
  const SlowFastRun run = simulate_slow_fast(cfg, opts);
  const double h = cfg.base.h, T = cfg.base.T;
  const std::size_t J = cfg.base.steps(), M = cfg.base.M;

  ExperimentResult res;
  res.kind = "hoelder-study";
  res.seeds = {cfg.base.seed};
  res.theoretical_slope = cfg.base.spec.theta / 2.0;
  for (double delta : delta_grid) {
    const std::size_t q = steps_of(delta, h, "delta");
    GridPoint gp = time_integral(M, J, h, T, m, [&](std::size_t i, std::size_t j) {
      return dist(run.slow.at(i, j), run.slow.at(i, (j - 1) / q * q));
    });
    gp.param = delta;
    res.grid.push_back(gp);
  }
  fit_loglog(res);
  res.metrics["epsilon"] = cfg.epsilon;
  res.metrics["m"] = m;
  res.runtime_s = seconds_since(t0);
  return res;
}

ExperimentResult auxiliary_gap_study(const MultiscaleConfig& cfg, std::span<const double> delta_grid, double m) {
  check_geometric(delta_grid, "auxiliary_gap_study");
  const auto t0 = Clock::now();
  std::size_t stride = 0;
  for (double d : delta_grid) stride = std::gcd(stride, steps_of(d, cfg.h_fast, "delta"));
  SlowFastOptions opts;
  opts.snapshot_stride = stride;
  const SlowFastRun run = simulate_slow_fast(cfg, opts);
  const double h = cfg.base.h, T = cfg.base.T;
  const std::size_t J = cfg.base.steps(), M = cfg.base.M;

  ExperimentResult res;
  res.kind = "aux-gap-study";
  res.seeds = {cfg.base.seed};
  res.theoretical_slope = cfg.base.spec.theta / 2.0;
  for (double delta : delta_grid) {
    MultiscaleConfig c = cfg;
    c.delta = delta;
    const PathEnsemble aux = simulate_auxiliary(c, *run.snapshots);
    GridPoint gp = time_integral(M, J, h, T, m, [&](std::size_t i, std::size_t j) {
      return dist(run.fast.at(i, j), aux.at(i, j));
    });
    gp.param = delta;
    res.grid.push_back(gp);
  }
  fit_loglog(res);
  res.metrics["epsilon"] = cfg.epsilon;
  res.metrics["m"] = m;
  res.metrics["snapshot_stride"] = stride;
  res.runtime_s = seconds_since(t0);
  return res;
}

ExperimentResult ergodicity_study(std::span<const FrozenInput> inputs, const OperatorSpec& spec,
                                  const CoefficientSet& coeffs, std::span<const double> t_grid,
                                  std::size_t n_replicas, std::uint64_t seed, double h, int threads) {
  if (inputs.empty()) throw std::invalid_argument("ergodicity_study: no inputs");
  const auto t0 = Clock::now();
  ExperimentResult res;
  res.kind = "ergodicity";
  res.seeds = {seed};
  json curves = json::array();
  double wsum = 0.0, wrate = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const DecayReport rep = ergodicity_decay(inputs[i], spec, coeffs, t_grid, n_replicas, seed, h, threads);
    res.theoretical_slope = rep.gap;
    GridPoint gp;
    gp.param = static_cast<double>(i);
    if (rep.fitted_rate) {
      gp.error = *rep.fitted_rate;
      gp.std_error = *rep.rate_stderr;
      const double w = 1.0 / std::max(gp.std_error * gp.std_error, 1e-24);
      wsum += w;
      wrate += w * gp.error;
    } else {
      gp.floor_flag = true;
      res.flags.push_back("no_signal:" + std::to_string(i));
    }
    if (rep.fitted_rate && !rep.envelope_ok) res.flags.push_back("envelope_violated:" + std::to_string(i));
    res.grid.push_back(gp);
    curves.push_back({{"t", rep.t},
                      {"gap_value", rep.gap_value},
                      {"std_error", rep.std_error},
                      {"points_used", rep.points_used},
                      {"envelope_C", rep.envelope_C},
                      {"envelope_ok", rep.envelope_ok}});
  }
  if (wsum > 0.0) {
    res.fitted_slope = wrate / wsum;
    res.slope_stderr = 1.0 / std::sqrt(wsum);
  }
  res.metrics["curves"] = curves;
  res.metrics["n_replicas"] = n_replicas;
  res.runtime_s = seconds_since(t0);
  return res;
}

ExperimentResult picard_study(const SimConfig& cfg, std::size_t n_iters, double lambda_weight) {
  const auto t0 = Clock::now();
  const PicardReport rep = picard_law_iteration(cfg, n_iters, lambda_weight);
  ExperimentResult res;
  res.kind = "picard";
  res.seeds = {cfg.seed};
  for (std::size_t n = 0; n < rep.d.size(); ++n) res.grid.push_back({static_cast<double>(n), rep.d[n], 0.0, false});
  if (rep.floor_index)
    for (std::size_t n = *rep.floor_index; n < res.grid.size(); ++n) res.grid[n].floor_flag = true;
  res.flags = rep.warnings;
  res.metrics["ratios"] = rep.ratios;
  res.metrics["lambda_weight"] = rep.lambda_weight;
  res.metrics["floor_index"] = rep.floor_index ? json(*rep.floor_index) : json(nullptr);
  res.metrics["note"] = rep.note;
  res.runtime_s = seconds_since(t0);
  return res;
}

ExperimentResult simulate_study(const SimConfig& cfg, double m) {
  const auto t0 = Clock::now();
  const PathEnsemble ens = simulate_mkv(cfg);
  const MomentReport mr = moment_bound_check(ens, m, cfg.spec);
  ExperimentResult res;
  res.kind = "simulate";
  res.seeds = {cfg.seed};
  const LawFlow& flow = ens.law_flow();
  std::vector<double> powed(cfg.M);
  for (std::size_t j = 0; j < flow.times.size(); ++j) {
    for (std::size_t i = 0; i < cfg.M; ++i) powed[i] = std::pow(norm(flow.measures[j].particle(i)), m);
    const MeanEstimate e = mean_stderr(powed);
    const double v = std::pow(e.mean, 1.0 / m);
    const double se = e.mean > 0.0 ? v / (m * e.mean) * e.std_error : 0.0;
    res.grid.push_back({flow.times[j], v, se, false});
  }
  res.metrics["moment_sup"] = mr.sup;
  res.metrics["moment_stable"] = mr.stable;
  res.metrics["trend_slope"] = mr.trend_slope;
  res.metrics["trend_stderr"] = mr.trend_stderr;
  if (!mr.stable) res.flags.push_back("moment_growth");
  res.runtime_s = seconds_since(t0);
  return res;
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json meta_json(const ExperimentResult& r) {
  json floors = json::array();
  for (const auto& g : r.grid) floors.push_back(g.floor_flag);
  return {{"kind", r.kind},
          {"config", r.config},
          {"config_hash", r.config_hash},
          {"seeds", r.seeds},
          {"fitted_slope", opt(r.fitted_slope)},
          {"fit_r2", opt(r.fit_r2)},
          {"slope_stderr", opt(r.slope_stderr)},
          {"theoretical_slope", opt(r.theoretical_slope)},
          {"flags", r.flags},
          {"metrics", r.metrics},
          {"floor_flags", floors}};
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

fs::path persist(const ExperimentResult& result, const fs::path& out_dir) {
  if (result.grid.empty()) throw std::invalid_argument("persist: empty grid, nothing written");
  if (result.kind.empty()) throw std::invalid_argument("persist: result has no kind");
  const json meta = meta_json(result);
  const std::string hash = result.config_hash.empty() ? sha256_hex(meta.dump()).substr(0, 16) : result.config_hash;
  const fs::path dir = out_dir / result.kind / hash;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

  std::string csv = "param,error,stderr\n";
  for (const auto& g : result.grid) csv += fmt17(g.param) + "," + fmt17(g.error) + "," + fmt17(g.std_error) + "\n";

  std::string dat = "# log10(param) log10(error) stderr_of_log10(error)\n";
  for (const auto& g : result.grid) {
    if (!(g.param > 0.0) || !(g.error > 0.0)) continue;
    dat += fmt17(std::log10(g.param)) + " " + fmt17(std::log10(g.error)) + " " +
           fmt17(g.std_error / (g.error * std::log(10.0))) + "\n";
  }

  const std::vector<std::pair<std::string, std::string>> files = {
      {"result.csv", csv}, {"meta.json", meta.dump(2) + "\n"}, {"loglog.dat", dat}};
  json listing = json::array();
  for (const auto& [name, content] : files) {
    write_file(dir / name, content);
    listing.push_back({{"name", name}, {"sha256", sha256_hex(content)}});
  }
  const json info = {{"runtime_s", result.runtime_s}, {"finished_at", utc_now()}};
  write_file(dir / "run_info.json", info.dump(2) + "\n");
  listing.push_back({{"name", "run_info.json"}, {"volatile", true}});

  const json manifest = {{"kind", result.kind}, {"config_hash", hash}, {"files", listing}};
  const fs::path mpath = dir / "manifest.json";
  write_file(mpath, manifest.dump(2) + "\n");
  return mpath;
}

ExperimentResult load_result(const fs::path& dir) {
  ExperimentResult r;
  const json meta = json::parse(read_file(dir / "meta.json"));
  r.kind = meta.at("kind").get<std::string>();
  r.config = meta.at("config");
  r.config_hash = meta.at("config_hash").get<std::string>();
  r.seeds = meta.at("seeds").get<std::vector<std::uint64_t>>();
  r.fitted_slope = opt_from(meta, "fitted_slope");
  r.fit_r2 = opt_from(meta, "fit_r2");
  r.slope_stderr = opt_from(meta, "slope_stderr");
  r.theoretical_slope = opt_from(meta, "theoretical_slope");
  r.flags = meta.at("flags").get<std::vector<std::string>>();
  r.metrics = meta.at("metrics");
  const auto floors = meta.at("floor_flags").get<std::vector<bool>>();

  std::istringstream csv(read_file(dir / "result.csv"));
  std::string line;
  std::getline(csv, line);
  if (line != "param,error,stderr") throw std::runtime_error("unexpected header in " + (dir / "result.csv").string());
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    GridPoint g;
    char* end = nullptr;
    const char* s = line.c_str();
    g.param = std::strtod(s, &end);
    g.error = std::strtod(end + 1, &end);
    g.std_error = std::strtod(end + 1, &end);
    r.grid.push_back(g);
  }
  if (floors.size() != r.grid.size()) throw std::runtime_error("floor flags do not match the grid in " + dir.string());
  for (std::size_t i = 0; i < floors.size(); ++i) r.grid[i].floor_flag = floors[i];

  const json info = json::parse(read_file(dir / "run_info.json"));
  r.runtime_s = info.at("runtime_s").get<double>();
  return r;
}

}  // namespace mvlevy
