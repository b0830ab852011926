#include "mvlevy/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mvlevy {

MeanEstimate mean_stderr(std::span<const double> xs) {
  MeanEstimate est;
  est.n = xs.size();
  if (xs.empty()) return est;
  double s = 0.0;
  for (double x : xs) s += x;
  est.mean = s / static_cast<double>(xs.size());
  if (xs.size() < 2) return est;
  double ss = 0.0;
  for (double x : xs) ss += (x - est.mean) * (x - est.mean);
  const double var = ss / static_cast<double>(xs.size() - 1);
  est.std_error = std::sqrt(var / static_cast<double>(xs.size()));
  return est;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y, std::span<const double> weights) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: x and y differ in length");
  if (!weights.empty() && weights.size() != x.size())
    throw std::invalid_argument("fit_line: weights differ in length");
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("fit_line: need at least two points");

  auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w(i);
    sx += w(i) * x[i];
    sy += w(i) * y[i];
  }
  const double xm = sx / sw;
  const double ym = sy / sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w(i) * (x[i] - xm) * (x[i] - xm);
    sxy += w(i) * (x[i] - xm) * (y[i] - ym);
    syy += w(i) * (y[i] - ym) * (y[i] - ym);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_line: x values are all equal");

  LineFit fit;
  fit.n = n;
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    rss += w(i) * r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - rss / syy : 1.0;
  if (n > 2) {
    const double red_chi2 = rss / static_cast<double>(n - 2);
    fit.slope_stderr = weights.empty() ? std::sqrt(red_chi2 / sxx)
                                       : std::sqrt(std::max(1.0, red_chi2) / sxx);
  } else {
    fit.slope_stderr = weights.empty() ? 0.0 : std::sqrt(1.0 / sxx);
  }
  return fit;
}

double kolmogorov_survival(double t) {
  if (t <= 0.0) return 1.0;
  if (t < 0.2) return 1.0;
  double s = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * t * t);
    s += (j % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double sq = std::sqrt(ne);
  // Stephens' small-sample correction.
  return {d, kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d)};
}

LineFit tail_index_fit(std::span<const double> samples, double x_lo, double x_hi, int n_points) {
  if (samples.empty()) throw std::invalid_argument("tail_index_fit: empty sample");
  if (!(x_lo > 0.0 && x_hi > x_lo) || n_points < 2) throw std::invalid_argument("tail_index_fit: bad range");
  std::vector<double> mags(samples.size());
  std::transform(samples.begin(), samples.end(), mags.begin(), [](double v) { return std::abs(v); });
  std::sort(mags.begin(), mags.end());
  const double n = static_cast<double>(mags.size());
  // Unweighted: count weights pull the fit toward x_lo, where the second
  // order term of the stable tail (x^{-2 alpha}) is largest.
  std::vector<double> lx, ly;
  for (int i = 0; i < n_points; ++i) {
    const double x = x_lo * std::pow(x_hi / x_lo, static_cast<double>(i) / (n_points - 1));
    const auto above = static_cast<double>(mags.end() - std::upper_bound(mags.begin(), mags.end(), x));
    if (above < 1.0) continue;
    lx.push_back(std::log(x));
    ly.push_back(std::log(above / n));
  }
  return fit_line(lx, ly);
}

}  // namespace mvlevy
