#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mvlevy {

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample std / sqrt(n); 0 when n < 2
  std::size_t n = 0;
};

/// Mean and Monte Carlo standard error, summed in index order.
MeanEstimate mean_stderr(std::span<const double> xs);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
  std::size_t n = 0;
};

/// Least-squares line y = intercept + slope x. With weights (1/sigma^2) the
/// slope error is sqrt(1/Sxx_w) inflated by the reduced chi-square when the
/// scatter exceeds the stated errors; without weights it is the usual
/// residual-based estimate. Needs at least two distinct x.
LineFit fit_line(std::span<const double> x, std::span<const double> y, std::span<const double> weights = {});

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Asymptotic Kolmogorov survival function Q(t) = 2 sum_j (-1)^{j-1} e^{-2 j^2 t^2}.
double kolmogorov_survival(double t);

/// Two-sample Kolmogorov-Smirnov test.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Log-log fit of the empirical survival P(|S| > x) on n_points log-spaced
/// thresholds in [x_lo, x_hi]; the slope estimates -alpha.
LineFit tail_index_fit(std::span<const double> samples, double x_lo, double x_hi, int n_points = 12);

}  // namespace mvlevy
