#pragma once

#include <span>
#include <vector>

namespace pfsensor {

/// Density of the uncertain parameter xi, truncated to a finite support and renormalized
/// there so that the pdf integrates to one over [support_lo, support_hi].
class Distribution {
 public:
  enum class Kind { kGaussian, kKde };

  /// Gaussian N(mu, sigma^2) on [mu - half_width_sigmas * sigma, mu + half_width_sigmas * sigma].
  static Distribution gaussian(double mu, double sigma, double half_width_sigmas = 8.0);
  /// Gaussian-kernel density on `data` with bandwidth h, supported on [min - 4h, max + 4h].
  static Distribution kde(std::vector<double> data, double bandwidth);

  Kind kind() const { return kind_; }
  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }
  double mu() const { return mu_; }
  double sigma() const { return sigma_; }
  double bandwidth() const { return sigma_; }
  const std::vector<double>& data() const { return data_; }

  /// Zero outside the support.
  double pdf(double x) const;
  /// 0 below the support, 1 above it.
  double cdf(double x) const;

 private:
  Distribution(Kind kind, double mu, double sigma, std::vector<double> data, double lo, double hi);
  double raw_pdf(double x) const;
  double raw_cdf(double x) const;

  Kind kind_;
  double mu_;
  double sigma_;  // standard deviation, or kernel bandwidth for KDE
  std::vector<double> data_;
  double lo_;
  double hi_;
  double raw_cdf_lo_ = 0.0;
  double mass_ = 1.0;
};

/// Gaussian KDE with Silverman's bandwidth h = 1.06 * sd * n^(-1/5).
/// Throws std::invalid_argument for fewer than two points, non-finite data or zero variance.
Distribution fit_kde(std::vector<double> data);

/// Quantiles F^-1(p) by bisection on the CDF to 1e-10 in p; p = 0 and p = 1 map to the support
/// bounds. Throws std::invalid_argument unless the points are strictly increasing in [0, 1].
std::vector<double> icdf_samples(const Distribution& dist, std::span<const double> cdf_points);

/// theta_i = integral of N_i(xi) rho(xi) over the support, where N_i are piecewise-linear hat
/// functions on the sample nodes, held at 1 between the end nodes and the support bounds.
/// Throws std::invalid_argument for fewer than two samples, unsorted samples or samples outside
/// the support.
std::vector<double> basis_weights(std::span<const double> samples, const Distribution& dist);

/// Hat-function value N_i(x) for node set `samples`, with the same end extension.
double basis_function(std::span<const double> samples, std::size_t i, double x);

/// Sample values xi_i with their cdf points and probability weights theta_i.
struct QuadratureRule {
  /// Validates sizes, strictly increasing samples, non-negative weights summing to 1 within 1e-9.
  QuadratureRule(std::vector<double> samples, std::vector<double> cdf_points, std::vector<double> weights);

  std::size_t size() const { return samples.size(); }

  std::vector<double> samples;
  std::vector<double> cdf_points;
  std::vector<double> weights;
};

/// icdf_samples followed by basis_weights.
QuadratureRule make_quadrature_rule(const Distribution& dist, std::span<const double> cdf_points);

/// sum_i theta_i v_i. Throws std::invalid_argument on count mismatch.
double expectation(const QuadratureRule& rule, std::span<const double> values);

}  // namespace pfsensor
