#include "mvlevy_cli/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>

#include "CLI11.hpp"
#include "mvlevy/coefficients.hpp"
#include "mvlevy/config.hpp"
#include "mvlevy/errors.hpp"
#include "mvlevy/experiments.hpp"
#include "mvlevy/multiscale.hpp"
#include "mvlevy/solver.hpp"

namespace mvlevy::cli {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  int threads = 0;
};

// Validation failure: exit code 2.
struct Rejected : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> dyadic(int from, int to) {
  std::vector<double> g;
  for (int k = from; k <= to; ++k) g.push_back(std::ldexp(1.0, -k));
  return g;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void stamp(ExperimentResult& r, const RunConfig& cfg) {
  r.config_hash = config_hash(cfg);
  r.config = to_json(cfg);
  r.config["study"].erase("out_dir");
}

void print_fit(const ExperimentResult& r, std::ostream& out) {
  for (const auto& g : r.grid)
    out << "  " << num(g.param) << "  " << num(g.error) << " +- " << num(g.std_error)
        << (g.floor_flag ? "  [floor]" : "") << "\n";
  if (r.fitted_slope)
    out << "fitted slope " << num(*r.fitted_slope) << " (stderr " << num(r.slope_stderr.value_or(0.0)) << ")";
  else
    out << "fitted slope n/a";
  if (r.theoretical_slope) out << ", expected " << num(*r.theoretical_slope);
  out << "\n";
  for (const auto& f : r.flags) out << "flag: " << f << "\n";
}

// Runs `check` and converts every validation failure into Rejected.
void validated(const std::function<void()>& check) {
  try {
    check();
  } catch (const AssumptionError& e) {
    throw Rejected(e.what());
  } catch (const std::invalid_argument& e) {
    throw Rejected(e.what());
  }
}

fs::path cmd_validate(const RunConfig& cfg, std::ostream& out) {
  const CoefficientSet coeffs = make_coefficients(cfg);
  ValidationReport rep;
  validated([&] { rep = validate_assumptions(cfg.op, coeffs, cfg.sim.seed); });
  for (const auto& c : rep.checks)
    out << c.name << ": " << (c.passed ? "pass" : "FAIL") << (c.detail.empty() ? "" : "  " + c.detail) << "\n";
  if (const AssumptionCheck* bad = rep.first_failure()) throw Rejected(bad->name + ": " + bad->detail);

  ExperimentResult r;
  r.kind = "validate";
  r.seeds = {cfg.sim.seed};
  nlohmann::json checks = nlohmann::json::array();
  for (std::size_t i = 0; i < rep.checks.size(); ++i) {
    r.grid.push_back({static_cast<double>(i + 1), rep.checks[i].passed ? 1.0 : 0.0, 0.0, false});
    checks.push_back({{"name", rep.checks[i].name}, {"passed", rep.checks[i].passed}, {"detail", rep.checks[i].detail}});
  }
  r.metrics["checks"] = checks;
  stamp(r, cfg);
  return persist(r, cfg.study.out_dir);
}

fs::path cmd_simulate(const RunConfig& cfg, int threads, std::ostream& out) {
  const SimConfig sim = make_sim_config(cfg, threads);
  validated([&] { require_single_scale(sim); });
  ExperimentResult r = simulate_study(sim, cfg.study.m);
  stamp(r, cfg);
  out << "moment sup " << num(r.metrics.value("moment_sup", 0.0)) << "\n";
  for (const auto& f : r.flags) out << "flag: " << f << "\n";
  return persist(r, cfg.study.out_dir);
}

fs::path cmd_picard(const RunConfig& cfg, int threads, std::ostream& out) {
  const SimConfig sim = make_sim_config(cfg, threads);
  validated([&] { require_single_scale(sim); });
  ExperimentResult r = picard_study(sim, cfg.study.n_iters, cfg.study.lambda_weight);
  stamp(r, cfg);
  for (const auto& g : r.grid) out << "  d_" << g.param << " = " << num(g.error) << "\n";
  for (const auto& f : r.flags) out << "flag: " << f << "\n";
  return persist(r, cfg.study.out_dir);
}

fs::path cmd_ergodicity(const RunConfig& cfg, int threads, std::ostream& out) {
  const CoefficientSet coeffs = make_coefficients(cfg);
  EffectiveConstants ec;
  validated([&] {
    const ValidationReport rep = validate_assumptions(cfg.op, coeffs, cfg.sim.seed);
    require_checks(rep, {"A1", "A2", "A3", "B1", "B2"});
    require_dissipative(coeffs, cfg.op);
    ec = effective_constants(coeffs, cfg.op);
  });
  std::vector<double> t_grid = cfg.study.grid;
  if (t_grid.empty()) {
    const double t_max = 8.0 / ec.gap;
    for (int i = 0; i <= 16; ++i) t_grid.push_back(t_max * i / 16.0);
  } else if (t_grid.front() > 0.0) {
    t_grid.insert(t_grid.begin(), 0.0);
  }
  FrozenInput in{SpectralField(cfg.sim.xi), 0.0, SpectralField(cfg.sim.eta)};
  for (double v : cfg.sim.xi) in.mu_stat += std::abs(v);
  const FrozenInput inputs[] = {in};
  ExperimentResult r =
      ergodicity_study(inputs, cfg.op, coeffs, t_grid, cfg.study.n_replicas, cfg.sim.seed, 1.0 / 64.0, threads);
  stamp(r, cfg);
  for (const auto& g : r.grid)
    out << "input " << g.param << ": fitted rate " << num(g.error) << " +- " << num(g.std_error) << ", gap "
        << num(ec.gap) << "\n";
  for (const auto& f : r.flags) out << "flag: " << f << "\n";
  return persist(r, cfg.study.out_dir);
}

fs::path cmd_rate_study(const RunConfig& cfg, int threads, std::ostream& out) {
  const std::vector<double> grid = cfg.study.grid.empty() ? dyadic(4, 9) : cfg.study.grid;
  const MultiscaleConfig tmpl = make_multiscale_config(cfg, grid.front(), threads);
  std::optional<AveragedDrift> drift;
  validated([&] {
    const ValidationReport rep = validate_assumptions(cfg.op, tmpl.base.coeffs, cfg.sim.seed);
    if (const AssumptionCheck* bad = rep.first_failure()) throw AssumptionError(bad->name, bad->detail);
    for (double eps : grid) validate_multiscale(make_multiscale_config(cfg, eps, threads));
    ErgodicSettings es;
    es.seed = cfg.sim.seed;
    es.threads = threads;
    drift.emplace(parse_fbar_mode(cfg.study.fbar_mode), cfg.op, tmpl.base.coeffs, es);
  });
  ExperimentResult r = rate_study(tmpl, *drift, grid, cfg.study.m, cfg.sim.h_fast);
  stamp(r, cfg);
  print_fit(r, out);
  return persist(r, cfg.study.out_dir);
}

std::vector<fs::path> cmd_hoelder_study(const RunConfig& cfg, int threads, std::ostream& out) {
  const std::vector<double> grid = cfg.study.grid.empty() ? dyadic(3, 7) : cfg.study.grid;
  const MultiscaleConfig ms = make_multiscale_config(cfg, cfg.study.epsilon, threads);
  validated([&] { validate_multiscale(ms, false); });
  ExperimentResult h = hoelder_study(ms, grid, cfg.study.m);
  stamp(h, cfg);
  out << "time-Hoelder\n";
  print_fit(h, out);
  ExperimentResult a = auxiliary_gap_study(ms, grid, cfg.study.m);
  stamp(a, cfg);
  out << "auxiliary gap\n";
  print_fit(a, out);
  return {persist(h, cfg.study.out_dir), persist(a, cfg.study.out_dir)};
}

int dispatch(const std::string& cmd, const Options& opt, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_config(opt.config);
  } catch (const ConfigError& e) {
    err << "config error at " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  if (opt.seed) cfg.sim.seed = *opt.seed;
  if (opt.out) cfg.study.out_dir = *opt.out;

  try {
    std::vector<fs::path> manifests;
    if (cmd == "validate")
      manifests = {cmd_validate(cfg, out)};
    else if (cmd == "simulate")
      manifests = {cmd_simulate(cfg, opt.threads, out)};
    else if (cmd == "picard")
      manifests = {cmd_picard(cfg, opt.threads, out)};
    else if (cmd == "ergodicity")
      manifests = {cmd_ergodicity(cfg, opt.threads, out)};
    else if (cmd == "rate-study")
      manifests = {cmd_rate_study(cfg, opt.threads, out)};
    else
      manifests = cmd_hoelder_study(cfg, opt.threads, out);
    for (const auto& m : manifests) out << m.string() << "\n";
    return 0;
  } catch (const Rejected& e) {
    err << "assumption check failed: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "config error at " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral-Galerkin McKean-Vlasov SPDE simulator with alpha-stable noise", "mvlevy"};
  app.require_subcommand(1, 1);
  Options opt;
  std::string chosen;
  const char* names[] = {"validate", "simulate", "picard", "ergodicity", "rate-study", "hoelder-study"};
  const char* about[] = {"check assumptions A1-A3 and B1-B3",
                         "simulate the particle system and track moments",
                         "Picard iteration on the law flow",
                         "decay rate of the frozen equation",
                         "strong averaging error against epsilon",
                         "time-Hoelder and auxiliary-gap rates against delta"};
  for (std::size_t i = 0; i < std::size(names); ++i) {
    CLI::App* sub = app.add_subcommand(names[i], about[i]);
    sub->add_option("--config", opt.config, "JSON config file")->required();
    sub->add_option("--seed", opt.seed, "override sim.seed");
    sub->add_option("--out", opt.out, "override study.out_dir");
    sub->add_option("--threads", opt.threads, "worker threads (0 = all)")->check(CLI::NonNegativeNumber);
    sub->callback([&chosen, n = names[i]] { chosen = n; });
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }
  return dispatch(chosen, opt, out, err);
}

}  // namespace mvlevy::cli
