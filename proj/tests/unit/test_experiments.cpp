#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mvlevy/coefficients.hpp"
#include "mvlevy/experiments.hpp"

using namespace mvlevy;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mvlevy_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

MultiscaleConfig small_ms(double eps) {
  MultiscaleConfig c;
  c.base.spec.n_modes = 3;
  c.base.coeffs = make_builtin(BuiltinFamily{}, 3, 1.0);
  c.base.T = 0.5;
  c.base.h = 1.0 / 64.0;
  c.base.M = 32;
  c.base.seed = 4;
  c.base.xi = SpectralField{1.0, 0.5, 0.0};
  c.epsilon = eps;
  c.h_fast = eps / 16.0;
  return c;
}

ExperimentResult sample_result() {
  ExperimentResult r;
  r.kind = "rate-study";
  r.grid = {{0.0625, 0.2, 0.01, false}, {0.03125, 0.15, 0.01, false}, {0.015625, 0.1 / 3.0, 0.02, true}};
  r.fitted_slope = 0.4;
  r.fit_r2 = 0.99;
  r.theoretical_slope = 2.0 / 7.0;
  r.config_hash = "0123456789abcdef";
  r.seeds = {1, 2};
  r.config = {{"x", 1}};
  r.flags = {"noise_floor:0.015625"};
  r.metrics = {{"m", 1.0}};
  r.runtime_s = 3.5;
  return r;
}

}  // namespace

TEST_CASE("log-log fit") {
  ExperimentResult r;
  for (double e : {0.5, 0.25, 0.125, 0.0625}) r.grid.push_back({e, 3.0 * std::pow(e, 0.3), 0.01, false});
  fit_loglog(r);
  REQUIRE(r.fitted_slope);
  CHECK(*r.fitted_slope == doctest::Approx(0.3));
  CHECK(*r.fit_r2 == doctest::Approx(1.0));
  REQUIRE(slope_without_noisiest(r));
  CHECK(*slope_without_noisiest(r) == doctest::Approx(0.3));

  r.grid[0].floor_flag = r.grid[1].floor_flag = true;
  fit_loglog(r);
  CHECK_FALSE(r.fitted_slope);
  CHECK(std::find(r.flags.begin(), r.flags.end(), "degenerate") != r.flags.end());
}

TEST_CASE("persist round trip and determinism") {
  const ExperimentResult r = sample_result();
  const fs::path a = scratch("persist_a"), b = scratch("persist_b");
  const fs::path ma = persist(r, a);
  CHECK(ma == a / "rate-study" / r.config_hash / "manifest.json");
  for (const char* f : {"result.csv", "meta.json", "loglog.dat", "run_info.json", "manifest.json"})
    CHECK(fs::exists(ma.parent_path() / f));

  ExperimentResult back = load_result(ma.parent_path());
  CHECK(back.runtime_s == r.runtime_s);
  CHECK(back == r);

  ExperimentResult slower = r;
  slower.runtime_s = 99.0;
  const fs::path mb = persist(slower, b);
  for (const char* f : {"result.csv", "meta.json", "loglog.dat", "manifest.json"})
    CHECK(slurp(ma.parent_path() / f) == slurp(mb.parent_path() / f));

  ExperimentResult empty = r;
  empty.grid.clear();
  const fs::path c = scratch("persist_c");
  CHECK_THROWS_AS(persist(empty, c), std::invalid_argument);
  CHECK_FALSE(fs::exists(c));
}

TEST_CASE("rate study bookkeeping") {
  const MultiscaleConfig c = small_ms(1.0 / 16.0);
  const AveragedDrift q(FbarMode::stable_quadrature, c.base.spec, c.base.coeffs);
  const std::vector<double> eps{1.0 / 16, 1.0 / 32, 1.0 / 64};
  const ExperimentResult r = rate_study(c, q, eps, 1.0, 1.0 / 16.0);
  REQUIRE(r.grid.size() == 3);
  CHECK(*r.theoretical_slope == doctest::Approx(2.0 / 7.0));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r.grid[i].param == eps[i]);
    CHECK(r.metrics["points"][i]["replica"].get<std::size_t>() == i);
    CHECK(r.grid[i].floor_flag == !(r.grid[i].error > 3.0 * r.grid[i].std_error));
  }
  const ExperimentResult again = rate_study(c, q, eps, 1.0, 1.0 / 16.0);
  CHECK(again.grid == r.grid);

  MultiscaleConfig one = c;
  one.base.spec.theta = 1.0;
  CHECK(*rate_study(one, q, std::vector<double>{1.0 / 16}, 1.0, 1.0 / 16.0).theoretical_slope ==
        doctest::Approx(0.25));
  CHECK_THROWS_AS(rate_study(c, q, std::vector<double>{}, 1.0, 1.0 / 16.0), std::invalid_argument);
}

TEST_CASE("Hoelder study oracles") {
  MultiscaleConfig c = small_ms(1.0 / 16.0);
  c.base.spec.theta = 1.0;
  const std::vector<double> single{c.base.h};
  const ExperimentResult r = hoelder_study(c, single, 1.0);
  CHECK(*r.theoretical_slope == doctest::Approx(0.5));
  SlowFastOptions opts;
  opts.record_fast = false;
  const SlowFastRun run = simulate_slow_fast(c, opts);
  double oracle = 0.0;
  for (std::size_t j = 1; j < run.slow.times(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.base.M; ++i) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < 3; ++k) {
        const double d = run.slow.at(i, j)[k] - run.slow.at(i, j - 1)[k];
        d2 += d * d;
      }
      s += std::sqrt(d2);
    }
    oracle += c.base.h * s / static_cast<double>(c.base.M) / c.base.T;
  }
  CHECK(r.grid[0].error == doctest::Approx(oracle));

  // Deterministic decay: increments are linear in delta.
  MultiscaleConfig det = c;
  det.base.spec.c_beta = 0.0;
  det.base.spec.c_gamma = 0.0;
  det.base.coeffs = zero_coefficients(1.0);
  det.base.xi = SpectralField{1.0, 0.0, 0.0};
  det.base.M = 2;
  det.base.h = 1.0 / 1024.0;
  det.h_fast = det.base.h;
  const ExperimentResult d = hoelder_study(det, std::vector<double>{0.0625, 0.03125, 0.015625, 0.0078125}, 1.0);
  REQUIRE(d.fitted_slope);
  CHECK(*d.fitted_slope == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("auxiliary gap study") {
  MultiscaleConfig c = small_ms(1.0 / 16.0);
  const ExperimentResult r = auxiliary_gap_study(c, std::vector<double>{0.125, 0.0625, 0.03125}, 1.0);
  REQUIRE(r.grid.size() == 3);
  for (const auto& g : r.grid) CHECK(g.error > 0.0);
  CHECK(r.grid[0].error > r.grid[2].error);
}
