#pragma once

// Finite spectral truncation of H: the diagonal operator A with eigenvalues
// -lambda_k, the noise amplitude sequences and the fractional norms.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace mvlevy {

/// Coordinates u_k of u = sum_k u_k e_k in the eigenbasis of A.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(std::size_t n, double value = 0.0) : coeffs_(n, value) {}
  SpectralField(std::initializer_list<double> init) : coeffs_(init) {}
  explicit SpectralField(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}
  explicit SpectralField(std::span<const double> coeffs)
      : coeffs_(coeffs.begin(), coeffs.end()) {}

  std::size_t size() const noexcept { return coeffs_.size(); }
  bool empty() const noexcept { return coeffs_.empty(); }
  double operator[](std::size_t k) const { return coeffs_[k]; }
  double& operator[](std::size_t k) { return coeffs_[k]; }

  std::span<const double> view() const noexcept { return coeffs_; }
  std::span<double> view() noexcept { return coeffs_; }
  const std::vector<double>& coeffs() const noexcept { return coeffs_; }

  /// H-norm |u|.
  double norm() const;
  bool finite() const;

  /// Zero-pads or truncates to n coordinates.
  SpectralField resized(std::size_t n) const;

  friend bool operator==(const SpectralField&, const SpectralField&) = default;

 private:
  std::vector<double> coeffs_;
};

double norm(std::span<const double> u);

/// Power-law spectrum and the stability/regularity parameters.
///
/// lambda_k = c_lambda * k^a, beta_k = c_beta * k^-b, gamma_k = c_gamma * k^-g
/// for k = 1..n_modes. With power laws every summability assumption reduces
/// to an inequality on exponents, so validation is exact.
struct OperatorSpec {
  std::size_t n_modes = 8;
  double c_lambda = 1.0;
  double a = 2.0;
  double c_beta = 1.0;
  double b = 1.0;
  double c_gamma = 1.0;
  double g = 1.0;
  double alpha = 1.5;
  double theta = 4.0 / 3.0;
  double p = 1.0;

  // k is 1-based.
  double lambda(std::size_t k) const;
  double beta(std::size_t k) const;
  double gamma(std::size_t k) const;

  std::vector<double> lambdas() const;
  std::vector<double> betas() const;
  std::vector<double> gammas() const;

  friend bool operator==(const OperatorSpec&, const OperatorSpec&) = default;
};

struct AssumptionCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<AssumptionCheck> checks;

  bool all_passed() const;
  const AssumptionCheck* find(const std::string& name) const;
  /// First failing check, or nullptr.
  const AssumptionCheck* first_failure() const;
};

/// Decides A1, A3 and both halves of B2 analytically from the exponents.
/// Throws std::invalid_argument when alpha, theta or p leave their ranges
/// (1 < alpha < 2, 0 < theta <= 2/alpha, 1 <= p < alpha).
ValidationReport validate_spec(const OperatorSpec& spec);

/// e^{tA}u: coordinate k scaled by e^{-lambda_k t}.
SpectralField apply_semigroup(const SpectralField& u, double t, const OperatorSpec& spec);

/// ||u||_sigma = (sum_k lambda_k^sigma u_k^2)^{1/2}, sigma in [0, 2].
double sobolev_norm(const SpectralField& u, double sigma, const OperatorSpec& spec);

}  // namespace mvlevy
