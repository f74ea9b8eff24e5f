#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tglm/einsum.hpp"
#include "tglm/epsilon.hpp"
#include "tglm/error.hpp"
#include "tglm/model.hpp"
#include "tglm/tensor.hpp"

namespace tglm {

/// C[h, a, g]: coefficient of beta[a, g] in null hypothesis h. Every
/// hypothesis must have at least one nonzero coefficient.
class ContrastTensor {
 public:
  explicit ContrastTensor(Tensor values) : values_(std::move(values)) {
    if (values_.rank() != 3) {
      throw Error(ErrorKind::shape_mismatch, "contrast tensor must be rank 3, got " + shape_string(values_.shape()));
    }
    const auto per_row = values_.extent(1) * values_.extent(2);
    for (std::size_t h = 0; h < hypotheses(); ++h) {
      bool any = false;
      for (std::size_t i = 0; i < per_row; ++i) any = any || values_.data()[h * per_row + i] != 0.0;
      if (!any) throw IndexedError(ErrorKind::all_zero_hypothesis, h, "hypothesis " + std::to_string(h) + " has no nonzero coefficient");
    }
  }

  const Tensor& values() const noexcept { return values_; }
  std::size_t hypotheses() const { return values_.extent(0); }
  std::size_t params() const { return values_.extent(1); }
  std::size_t groups() const { return values_.extent(2); }

 private:
  Tensor values_;
};

struct HypothesisResult {
  std::vector<double> g;
  std::vector<double> t;
  std::vector<double> standard_error;
  std::vector<double> p;
  std::optional<double> f;
  std::optional<double> f_p;
  long long df = 0;
};

namespace detail {

inline void require_matching(const ContrastTensor& c, const BetaTensor& beta) {
  if (beta.values.rank() != 2 || c.params() != beta.params() || c.groups() != beta.groups()) {
    throw Error(ErrorKind::shape_mismatch, "contrast shape " + shape_string(c.values().shape()) +
                                               " does not match beta shape " + shape_string(beta.values.shape()));
  }
}

/// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int max_iterations = 300;
  constexpr double tolerance = 1e-12;
  constexpr double tiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < tolerance) break;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Two-sided Student t p-value.
inline double t_pvalue(double t, long long df) {
  if (df < 1) throw Error(ErrorKind::no_degrees_of_freedom, "t_pvalue needs df >= 1");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  const double nu = static_cast<double>(df);
  return regularized_incomplete_beta(nu / 2.0, 0.5, nu / (nu + t * t));
}

/// Upper-tail p-value of an F(d1, d2) statistic.
inline double f_pvalue(double f, long long d1, long long d2) {
  if (d1 < 1 || d2 < 1) throw Error(ErrorKind::no_degrees_of_freedom, "f_pvalue needs positive degrees of freedom");
  if (std::isnan(f)) return std::numeric_limits<double>::quiet_NaN();
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  const double a = static_cast<double>(d1);
  const double b = static_cast<double>(d2);
  return regularized_incomplete_beta(b / 2.0, a / 2.0, b / (b + a * f));
}

/// g[h] = sum_{a,g} C[h, a, g] beta[a, g].
inline std::vector<double> contrast_value(const ContrastTensor& c, const BetaTensor& beta) {
  detail::require_matching(c, beta);
  static const EinsumSpec spec = parse_einsum("hal,al->h");
  const Tensor g = contract(spec, {c.values(), beta.values});
  return {g.data().begin(), g.data().end()};
}

/// M[h, h'] = sum_g C[h, ., g] W_g^{-1} C[h', ., g]. The diagonal is the
/// per-hypothesis quadratic form under the t statistic.
inline Tensor contrast_covariance(const ContrastTensor& c, const InverseReport& inverse) {
  static const EinsumSpec spec = parse_einsum("hal,abl,jbl->hj");
  return contract(spec, {c.values(), inverse.inverse, c.values()});
}

/// Per-hypothesis t statistics with a pooled residual variance:
///
///   t[h] = g[h] / sqrt(sigma^2 * sum_g C[h,.,g] W_g^{-1} C[h,.,g]^T)
inline HypothesisResult t_statistics(const ContrastTensor& c, const BetaTensor& beta, const InverseReport& inverse,
                                     const VarianceEstimate& variance) {
  detail::require_matching(c, beta);
  if (variance.df < 1) throw Error(ErrorKind::no_degrees_of_freedom, "t statistics need df >= 1");
  static const EinsumSpec quad_spec = parse_einsum("hal,abl,hbl->h");
  const Tensor quad = contract(quad_spec, {c.values(), inverse.inverse, c.values()});

  HypothesisResult r;
  r.df = variance.df;
  r.g = contrast_value(c, beta);
  for (std::size_t h = 0; h < c.hypotheses(); ++h) {
    const double q = quad.data()[h];
    if (!(q > 0.0)) {
      throw IndexedError(ErrorKind::non_positive_variance, h,
                         "hypothesis " + std::to_string(h) + " has non-positive quadratic form " + std::to_string(q));
    }
    const double se = std::sqrt(variance.pooled * q);
    const double t = r.g[h] / se;
    r.standard_error.push_back(se);
    r.t.push_back(t);
    r.p.push_back(t_pvalue(t, r.df));
  }
  return r;
}

inline HypothesisResult t_statistics(const ContrastTensor& c, const BetaTensor& beta, const DesignTensor& x,
                                     const VarianceEstimate& variance) {
  return t_statistics(c, beta, invert_gram(gram(x)), variance);
}

/// Joint Wald test of all hypotheses: F = g^T M^{-1} g / (H sigma^2).
inline double f_statistic(const ContrastTensor& c, const BetaTensor& beta, const InverseReport& inverse,
                          const VarianceEstimate& variance) {
  detail::require_matching(c, beta);
  if (variance.df < 1) throw Error(ErrorKind::no_degrees_of_freedom, "F statistic needs df >= 1");
  const auto g = contrast_value(c, beta);
  const Tensor m = contrast_covariance(c, inverse);
  Tensor m_inv;
  try {
    m_inv = elimination_inverse(m);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::singular_matrix) throw;
    throw Error(ErrorKind::singular_contrast_system, std::string("hypotheses are linearly dependent (") + e.what() + ")");
  }
  const auto h = g.size();
  double quad = 0.0;
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < h; ++j) quad += g[i] * m_inv.data()[i * h + j] * g[j];
  }
  return quad / (static_cast<double>(h) * variance.pooled);
}

inline double f_statistic(const ContrastTensor& c, const BetaTensor& beta, const DesignTensor& x,
                          const VarianceEstimate& variance) {
  return f_statistic(c, beta, invert_gram(gram(x)), variance);
}

}  // namespace tglm
