#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "tglm/epsilon.hpp"
#include "tglm/error.hpp"
#include "tglm/glm.hpp"
#include "tglm/hypothesis.hpp"
#include "tglm/model.hpp"
#include "tglm/op_counter.hpp"
#include "tglm/tensor.hpp"

namespace tglm {

/**
 * Conventional multi-group design: one dense (sum_g n_g) x (p G) matrix in
 * which each row is nonzero only in its own group's columns. Columns are
 * parameter-major, column = a * G + g, so with two groups and one regressor
 * the coefficient order is (b1, b2, m1, m2). Zeros are stored explicitly.
 */
struct StaggeredSystem {
  Tensor design;
  std::vector<double> outcome;
  std::vector<std::size_t> group;  ///< group of each row
  std::size_t params = 0;
  std::size_t groups = 0;

  std::size_t rows() const { return design.extent(0); }
  std::size_t cols() const { return design.extent(1); }
};

inline std::size_t staggered_column(std::size_t param, std::size_t group, std::size_t groups) {
  return param * groups + group;
}

inline StaggeredSystem build_staggered(const Dataset& data) {
  const auto groups = data.group_count;
  const auto r = data.regressor_count;
  const auto p = r + 1;
  if (groups == 0) throw Error(ErrorKind::empty_group, "dataset has no groups");
  const auto n = data.group_sizes();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.group[i] >= groups) {
      throw IndexedError(ErrorKind::group_id_out_of_range, data.group[i], "row " + std::to_string(i) + " group id out of range");
    }
    if (data.regressors.at(i).size() != r) {
      throw Error(ErrorKind::shape_mismatch, "row " + std::to_string(i) + " has the wrong regressor count");
    }
  }
  for (std::size_t g = 0; g < groups; ++g) {
    if (n[g] == 0) throw IndexedError(ErrorKind::empty_group, g, "group " + std::to_string(g) + " has no observations");
  }

  const auto rows = data.size();
  const auto cols = p * groups;
  std::vector<double> x(rows * cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto g = data.group[i];
    x[i * cols + staggered_column(0, g, groups)] = 1.0;
    for (std::size_t j = 0; j < r; ++j) x[i * cols + staggered_column(j + 1, g, groups)] = data.regressors[i][j];
  }
  return {Tensor({rows, cols}, std::move(x)), data.outcome, data.group, p, groups};
}

struct StaggeredFit {
  std::vector<double> coef;
  Tensor normal_inverse;  ///< (X^T X)^{-1}, (pG) x (pG)
  double sigma2 = 0.0;
  long long df = 0;
};

namespace detail {

inline Tensor normal_matrix(const StaggeredSystem& sys, OpCounter* ops) {
  const auto rows = sys.rows();
  const auto cols = sys.cols();
  const auto x = sys.design.data();
  std::vector<double> a(cols * cols, 0.0);
  for (std::size_t i = 0; i < cols; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < rows; ++k) acc += x[k * cols + i] * x[k * cols + j];
      a[i * cols + j] = acc;
    }
  }
  count_mul(ops, static_cast<std::uint64_t>(rows) * cols * cols);
  count_add(ops, static_cast<std::uint64_t>(rows) * cols * cols);
  return Tensor({cols, cols}, std::move(a));
}

}  // namespace detail

/// OLS on the full staggered system: forms X^T X and X^T y, inverts the
/// normal matrix by Gauss-Jordan elimination and applies it.
inline StaggeredFit fit_staggered_detailed(const StaggeredSystem& sys, FitCounters counters) {
  OpCounter* ops = counters.assemble;
  const auto rows = sys.rows();
  const auto cols = sys.cols();
  const auto x = sys.design.data();
  const Tensor a = detail::normal_matrix(sys, ops);

  std::vector<double> xty(cols, 0.0);
  for (std::size_t i = 0; i < cols; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < rows; ++k) acc += x[k * cols + i] * sys.outcome[k];
    xty[i] = acc;
  }
  detail::count_mul(ops, static_cast<std::uint64_t>(rows) * cols);
  detail::count_add(ops, static_cast<std::uint64_t>(rows) * cols);

  StaggeredFit out;
  ops = counters.solve;
  try {
    out.normal_inverse = elimination_inverse(a, ops);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::singular_matrix) throw;
    throw Error(ErrorKind::singular_system, std::string("staggered normal equations are singular (") + e.what() + ")");
  }

  const auto inv = out.normal_inverse.data();
  out.coef.assign(cols, 0.0);
  for (std::size_t i = 0; i < cols; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += inv[i * cols + j] * xty[j];
    out.coef[i] = acc;
  }
  detail::count_mul(ops, static_cast<std::uint64_t>(cols) * cols);
  detail::count_add(ops, static_cast<std::uint64_t>(cols) * cols);

  double rss = 0.0;
  for (std::size_t k = 0; k < rows; ++k) {
    double fitted = 0.0;
    for (std::size_t j = 0; j < cols; ++j) fitted += x[k * cols + j] * out.coef[j];
    const double e = sys.outcome[k] - fitted;
    rss += e * e;
  }
  out.df = static_cast<long long>(rows) - static_cast<long long>(cols);
  out.sigma2 = out.df > 0 ? rss / static_cast<double>(out.df) : std::nan("");
  return out;
}

inline StaggeredFit fit_staggered_detailed(const StaggeredSystem& sys, OpCounter* ops = nullptr) {
  return fit_staggered_detailed(sys, FitCounters{ops, ops});
}

inline std::vector<double> fit_staggered(const StaggeredSystem& sys, OpCounter* ops = nullptr) {
  return fit_staggered_detailed(sys, ops).coef;
}

/// beta[a, g] = flat[a * G + g].
inline BetaTensor flat_to_beta(const std::vector<double>& flat, std::size_t p, std::size_t groups) {
  if (flat.size() != p * groups) {
    throw Error(ErrorKind::length_mismatch, "coefficient vector of length " + std::to_string(flat.size()) +
                                                " cannot hold " + std::to_string(p) + " x " + std::to_string(groups));
  }
  return {Tensor({p, groups}, flat)};
}

inline std::vector<double> beta_to_flat(const BetaTensor& beta) {
  return {beta.values.data().begin(), beta.values.data().end()};
}

/// Contrast rows flattened onto staggered columns.
inline std::vector<std::vector<double>> flatten_contrast(const ContrastTensor& c) {
  const auto per_row = c.params() * c.groups();
  std::vector<std::vector<double>> rows(c.hypotheses());
  for (std::size_t h = 0; h < c.hypotheses(); ++h) {
    rows[h].assign(c.values().data().begin() + static_cast<std::ptrdiff_t>(h * per_row),
                   c.values().data().begin() + static_cast<std::ptrdiff_t>((h + 1) * per_row));
  }
  return rows;
}

/// t = C b / sqrt(sigma^2 C (X^T X)^{-1} C^T) for each contrast row.
inline HypothesisResult staggered_t_statistics(const ContrastTensor& c, const StaggeredFit& fit) {
  if (fit.df < 1) throw Error(ErrorKind::no_degrees_of_freedom, "staggered fit has no residual degrees of freedom");
  const auto rows = flatten_contrast(c);
  const auto n = fit.coef.size();
  if (c.params() * c.groups() != n) throw Error(ErrorKind::shape_mismatch, "contrast does not match staggered system");
  const auto inv = fit.normal_inverse.data();

  HypothesisResult r;
  r.df = fit.df;
  for (std::size_t h = 0; h < rows.size(); ++h) {
    const auto& cv = rows[h];
    double g = 0.0;
    for (std::size_t i = 0; i < n; ++i) g += cv[i] * fit.coef[i];
    double q = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) q += cv[i] * inv[i * n + j] * cv[j];
    }
    if (!(q > 0.0)) throw IndexedError(ErrorKind::non_positive_variance, h, "non-positive contrast variance");
    const double se = std::sqrt(fit.sigma2 * q);
    r.g.push_back(g);
    r.standard_error.push_back(se);
    r.t.push_back(g / se);
    r.p.push_back(t_pvalue(g / se, r.df));
  }
  return r;
}

/// Joint F from the full coefficient covariance sigma^2 (X^T X)^{-1}.
inline double staggered_f_statistic(const ContrastTensor& c, const StaggeredFit& fit) {
  if (fit.df < 1) throw Error(ErrorKind::no_degrees_of_freedom, "staggered fit has no residual degrees of freedom");
  const auto rows = flatten_contrast(c);
  const auto h = rows.size();
  const auto n = fit.coef.size();
  const auto inv = fit.normal_inverse.data();

  std::vector<double> g(h, 0.0);
  std::vector<double> cov(h * h, 0.0);
  for (std::size_t a = 0; a < h; ++a) {
    for (std::size_t i = 0; i < n; ++i) g[a] += rows[a][i] * fit.coef[i];
    for (std::size_t b = 0; b < h; ++b) {
      double q = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) q += rows[a][i] * fit.sigma2 * inv[i * n + j] * rows[b][j];
      }
      cov[a * h + b] = q;
    }
  }
  Tensor cov_inv;
  try {
    cov_inv = elimination_inverse(Tensor({h, h}, std::move(cov)));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::singular_matrix) throw;
    throw Error(ErrorKind::singular_contrast_system, std::string("hypotheses are linearly dependent (") + e.what() + ")");
  }
  double wald = 0.0;
  for (std::size_t a = 0; a < h; ++a) {
    for (std::size_t b = 0; b < h; ++b) wald += g[a] * cov_inv.data()[a * h + b] * g[b];
  }
  return wald / static_cast<double>(h);
}

}  // namespace tglm
