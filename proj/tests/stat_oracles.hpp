#pragma once

// Independent textbook references for the statistics tests.

#include <cmath>
#include <numbers>
#include <vector>

namespace tglm::testing {

/// Classical simple-regression t for the slope: m / (sigma / sqrt(Sxx)).
inline double simple_regression_slope_t(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double m = sxy / sxx;
  const double b = my - m * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) rss += (y[i] - b - m * x[i]) * (y[i] - b - m * x[i]);
  const double sigma = std::sqrt(rss / (n - 2.0));
  return m / (sigma / std::sqrt(sxx));
}

inline double student_t_density(double s, double nu) {
  const double log_c = std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) - 0.5 * std::log(nu * std::numbers::pi);
  return std::exp(log_c - (nu + 1.0) / 2.0 * std::log1p(s * s / nu));
}

/// Two-sided p-value by composite Simpson integration of the density over [0, |t|].
inline double two_sided_p_by_quadrature(double t, double nu, int intervals = 20000) {
  const double a = 0.0, b = std::abs(t);
  const double h = (b - a) / intervals;
  double sum = student_t_density(a, nu) + student_t_density(b, nu);
  for (int i = 1; i < intervals; ++i) sum += (i % 2 ? 4.0 : 2.0) * student_t_density(a + i * h, nu);
  return 1.0 - 2.0 * sum * h / 3.0;
}

}  // namespace tglm::testing
