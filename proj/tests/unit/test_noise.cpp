#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "mvlevy/rng.hpp"
#include "mvlevy/stable_noise.hpp"
#include "mvlevy/stats.hpp"

using namespace mvlevy;

namespace {

std::vector<double> stable_draws(double alpha, std::size_t n, std::uint64_t seed) {
  RngStream rng(seed, {0, 0, channel::sampling});
  std::vector<double> xs(n);
  for (auto& x : xs) x = sample_standard_stable(rng, alpha);
  return xs;
}

}  // namespace

TEST_CASE("Philox4x32-10 known-answer vectors") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are addressable and distinct") {
  const RngStream a(7, {0, 3, channel::slow});
  const RngStream b(7, {0, 3, channel::slow});
  const RngStream c(7, {0, 3, channel::fast});
  const RngStream d(7, {1, 3, channel::slow});
  CHECK(a.block(5, 2) == b.block(5, 2));
  CHECK(a.block(5, 2) != c.block(5, 2));
  CHECK(a.block(5, 2) != d.block(5, 2));
  CHECK(a.block(5, 2) != a.block(6, 2));
  CHECK(a.block(5, 2) != a.block(5, 3));

  RngStream s(1, {0, 0, channel::sampling});
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = s.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
}

TEST_CASE("standard stable sampler") {
  CHECK_THROWS_AS(StableSampler(2.0), std::invalid_argument);
  CHECK_THROWS_AS(StableSampler(1.0), std::invalid_argument);

  const std::size_t n = 1000000;
  auto xs = stable_draws(1.5, n, 11);
  // E cos(S) = e^{-1}
  CHECK(std::abs(chf_estimate(xs, 1.0) - 0.3679) < 0.004);

  std::nth_element(xs.begin(), xs.begin() + n / 2, xs.end());
  CHECK(std::abs(xs[n / 2]) < 0.01);

  const LineFit tail = tail_index_fit(xs, 5.0, 50.0);
  CHECK(std::abs(-tail.slope - 1.5) < 0.15);

  const auto ys = stable_draws(1.8, n, 12);
  CHECK(std::abs(chf_estimate(ys, 2.0) - std::exp(-std::pow(2.0, 1.8))) < 0.004);
}

TEST_CASE("chf_estimate trivial cases") {
  const std::vector<double> zeros(100, 0.0);
  CHECK(chf_estimate(zeros, 3.0) == 1.0);
  const std::vector<double> some{1.0, -2.0, 5.0};
  CHECK(chf_estimate(some, 0.0) == 1.0);
  CHECK_THROWS_AS(chf_estimate(std::vector<double>{}, 1.0), std::invalid_argument);
}

TEST_CASE("convolution scales") {
  OperatorSpec s;
  s.n_modes = 3;
  s.a = 1.0;  // lambda_k = k
  s.alpha = 1.5;
  s.theta = 1.0;
  auto oracle = [&](double lam, double amp, double h, double eps) {
    return amp * std::pow((1.0 - std::exp(-s.alpha * lam * h / eps)) / (s.alpha * lam), 1.0 / s.alpha);
  };

  const auto one = convolution_scales(s, 1.0, NoiseProcess::slow);
  CHECK(one[0] == doctest::Approx(oracle(1.0, 1.0, 1.0, 1.0)));
  CHECK(one[0] == doctest::Approx(0.6449).epsilon(1e-4));
  CHECK(one[2] == doctest::Approx(oracle(3.0, s.beta(3), 1.0, 1.0)));

  const auto inf = convolution_scales(s, 200.0, NoiseProcess::slow);
  CHECK(inf[0] == doctest::Approx(std::pow(1.0 / 1.5, 1.0 / 1.5)));
  CHECK(inf[0] == doctest::Approx(0.7631).epsilon(1e-4));

  const double h = 1e-7;
  const auto tiny = convolution_scales(s, h, NoiseProcess::slow);
  for (std::size_t k = 0; k < 3; ++k) CHECK(tiny[k] / (s.beta(k + 1) * std::pow(h, 1.0 / s.alpha)) == doctest::Approx(1.0).epsilon(1e-5));

  const double eps = 1.0 / 64.0;
  const auto fast = convolution_scales(s, 0.01, NoiseProcess::fast, eps);
  for (std::size_t k = 0; k < 3; ++k) CHECK(fast[k] == doctest::Approx(oracle(k + 1.0, s.gamma(k + 1), 0.01, eps)));

  CHECK_THROWS_AS(convolution_scales(s, 0.0, NoiseProcess::slow), std::invalid_argument);
}

TEST_CASE("convolution increments are reproducible per block") {
  OperatorSpec s;
  s.n_modes = 4;
  const RngStream rng(3, {0, 1, channel::slow});
  const auto a = sample_convolution_increment(s, 0.1, rng, 17, NoiseProcess::slow);
  const auto b = sample_convolution_increment(s, 0.1, rng, 17, NoiseProcess::slow);
  const auto c = sample_convolution_increment(s, 0.1, rng, 18, NoiseProcess::slow);
  CHECK(a.field == b.field);
  CHECK_FALSE(a.field == c.field);

  const StableSampler sampler(s.alpha);
  const auto scales = convolution_scales(s, 0.1, NoiseProcess::slow);
  std::vector<double> out(4);
  fill_increment(sampler, scales, rng, 17, out);
  for (std::size_t k = 0; k < 4; ++k) CHECK(out[k] == a.field[k]);
}
