#include "pfsensor/uncertainty.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace pfsensor {

namespace {

constexpr double kCdfTolerance = 1e-10;
constexpr double kWeightDriftLimit = 1e-6;

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double std_normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// Adaptive Gauss-Kronrod; relative tolerance 1e-10 keeps the absolute error of these
// sub-unit integrals well below 1e-8.
template <class F>
double integrate(F f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 15, 1e-10);
}

}  // namespace

Distribution::Distribution(Kind kind, double mu, double sigma, std::vector<double> data, double lo, double hi)
    : kind_(kind), mu_(mu), sigma_(sigma), data_(std::move(data)), lo_(lo), hi_(hi) {
  raw_cdf_lo_ = raw_cdf(lo_);
  mass_ = raw_cdf(hi_) - raw_cdf_lo_;
}

Distribution Distribution::gaussian(double mu, double sigma, double half_width_sigmas) {
  if (!std::isfinite(mu) || !(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("gaussian requires finite mu and sigma > 0");
  }
  if (!(half_width_sigmas > 0.0)) throw std::invalid_argument("support half width must be positive");
  return Distribution(Kind::kGaussian, mu, sigma, {}, mu - half_width_sigmas * sigma,
                      mu + half_width_sigmas * sigma);
}

Distribution Distribution::kde(std::vector<double> data, double bandwidth) {
  if (data.size() < 2) throw std::invalid_argument("kde needs at least two data points");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw std::invalid_argument("kde bandwidth must be positive");
  for (double d : data) {
    if (!std::isfinite(d)) throw std::invalid_argument("kde data must be finite");
  }
  std::sort(data.begin(), data.end());
  const double lo = data.front() - 4.0 * bandwidth;
  const double hi = data.back() + 4.0 * bandwidth;
  const double mean = std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(data.size());
  return Distribution(Kind::kKde, mean, bandwidth, std::move(data), lo, hi);
}

double Distribution::raw_pdf(double x) const {
  if (kind_ == Kind::kGaussian) return std_normal_pdf((x - mu_) / sigma_) / sigma_;
  double sum = 0.0;
  for (double d : data_) sum += std_normal_pdf((x - d) / sigma_);
  return sum / (static_cast<double>(data_.size()) * sigma_);
}

double Distribution::raw_cdf(double x) const {
  if (kind_ == Kind::kGaussian) return std_normal_cdf((x - mu_) / sigma_);
  double sum = 0.0;
  for (double d : data_) sum += std_normal_cdf((x - d) / sigma_);
  return sum / static_cast<double>(data_.size());
}

double Distribution::pdf(double x) const {
  if (x < lo_ || x > hi_) return 0.0;
  return raw_pdf(x) / mass_;
}

double Distribution::cdf(double x) const {
  if (x <= lo_) return 0.0;
  if (x >= hi_) return 1.0;
  return std::clamp((raw_cdf(x) - raw_cdf_lo_) / mass_, 0.0, 1.0);
}

Distribution fit_kde(std::vector<double> data) {
  if (data.size() < 2) throw std::invalid_argument("kde fit needs at least two data points");
  const auto n = static_cast<double>(data.size());
  double mean = 0.0;
  for (double d : data) {
    if (!std::isfinite(d)) throw std::invalid_argument("kde fit data must be finite");
    mean += d;
  }
  mean /= n;
  double ss = 0.0;
  for (double d : data) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0)) throw std::invalid_argument("kde fit data has zero variance");
  return Distribution::kde(std::move(data), 1.06 * sd * std::pow(n, -0.2));
}

std::vector<double> icdf_samples(const Distribution& dist, std::span<const double> cdf_points) {
  for (std::size_t i = 0; i < cdf_points.size(); ++i) {
    const double p = cdf_points[i];
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("cdf points must lie in [0, 1]");
    if (i > 0 && !(p > cdf_points[i - 1])) throw std::invalid_argument("cdf points must be strictly increasing");
  }
  std::vector<double> out;
  out.reserve(cdf_points.size());
  for (double p : cdf_points) {
    if (p == 0.0) {
      out.push_back(dist.support_lo());
      continue;
    }
    if (p == 1.0) {
      out.push_back(dist.support_hi());
      continue;
    }
    double a = dist.support_lo();
    double b = dist.support_hi();
    double x = 0.5 * (a + b);
    for (int iter = 0; iter < 200; ++iter) {
      x = 0.5 * (a + b);
      const double f = dist.cdf(x) - p;
      if (std::abs(f) <= kCdfTolerance || b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) break;
      (f < 0.0 ? a : b) = x;
    }
    out.push_back(x);
  }
  return out;
}

double basis_function(std::span<const double> xs, std::size_t i, double x) {
  const std::size_t m = xs.size();
  if (i > 0 && x >= xs[i - 1] && x <= xs[i]) return (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  if (i + 1 < m && x >= xs[i] && x <= xs[i + 1]) return (xs[i + 1] - x) / (xs[i + 1] - xs[i]);
  if (i == 0 && x <= xs[0]) return 1.0;
  if (i + 1 == m && x >= xs[m - 1]) return 1.0;
  return 0.0;
}

std::vector<double> basis_weights(std::span<const double> xs, const Distribution& dist) {
  const std::size_t m = xs.size();
  if (m < 2) throw std::invalid_argument("basis weights need at least two samples");
  for (std::size_t i = 0; i < m; ++i) {
    if (xs[i] < dist.support_lo() || xs[i] > dist.support_hi()) {
      throw std::invalid_argument("sample outside the distribution support");
    }
    if (i > 0 && !(xs[i] > xs[i - 1])) throw std::invalid_argument("samples must be strictly increasing");
  }

  auto pdf = [&](double x) { return dist.pdf(x); };
  std::vector<double> theta(m, 0.0);
  theta.front() += integrate(pdf, dist.support_lo(), xs.front());
  theta.back() += integrate(pdf, xs.back(), dist.support_hi());
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double a = xs[i];
    const double b = xs[i + 1];
    const double width = b - a;
    theta[i] += integrate([&](double x) { return (b - x) / width * dist.pdf(x); }, a, b);
    theta[i + 1] += integrate([&](double x) { return (x - a) / width * dist.pdf(x); }, a, b);
  }

  const double total = std::accumulate(theta.begin(), theta.end(), 0.0);
  if (std::abs(total - 1.0) > kWeightDriftLimit) {
    throw std::runtime_error("basis weights drift from unity by more than 1e-6");
  }
  for (double& t : theta) t = std::max(t, 0.0) / total;
  return theta;
}

QuadratureRule::QuadratureRule(std::vector<double> s, std::vector<double> p, std::vector<double> w)
    : samples(std::move(s)), cdf_points(std::move(p)), weights(std::move(w)) {
  if (samples.size() != weights.size() || samples.size() != cdf_points.size()) {
    throw std::invalid_argument("quadrature rule sizes differ");
  }
  if (samples.empty()) throw std::invalid_argument("quadrature rule is empty");
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i > 0 && !(samples[i] > samples[i - 1])) throw std::invalid_argument("samples must be strictly increasing");
    if (!(weights[i] >= 0.0)) throw std::invalid_argument("weights must be non-negative");
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("weights must sum to 1");
}

QuadratureRule make_quadrature_rule(const Distribution& dist, std::span<const double> cdf_points) {
  std::vector<double> samples = icdf_samples(dist, cdf_points);
  std::vector<double> weights = basis_weights(samples, dist);
  return QuadratureRule(std::move(samples), std::vector<double>(cdf_points.begin(), cdf_points.end()),
                        std::move(weights));
}

double expectation(const QuadratureRule& rule, std::span<const double> values) {
  if (values.size() != rule.size()) throw std::invalid_argument("expectation: value count differs from rule size");
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) sum += rule.weights[i] * values[i];
  return sum;
}

}  // namespace pfsensor
