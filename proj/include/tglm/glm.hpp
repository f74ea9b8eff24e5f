#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tglm/einsum.hpp"
#include "tglm/epsilon.hpp"
#include "tglm/error.hpp"
#include "tglm/model.hpp"
#include "tglm/op_counter.hpp"
#include "tglm/tensor.hpp"

namespace tglm {

/// Lays the dataset out as X[k, a, g] and Y[k, g]. Column 0 is the intercept,
/// column j holds regressor j - 1, and rows keep their input order within each
/// group. Groups shorter than the longest one are zero-padded.
inline std::pair<DesignTensor, OutcomeTensor> build_design(const Dataset& data) {
  const auto groups = data.group_count;
  const auto r = data.regressor_count;
  const auto p = r + 1;
  if (groups == 0) throw Error(ErrorKind::empty_group, "dataset has no groups");
  if (data.regressors.size() != data.size() || data.group.size() != data.size()) {
    throw Error(ErrorKind::shape_mismatch, "outcome, regressor and group columns differ in length");
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.group[i] >= groups) {
      throw IndexedError(ErrorKind::group_id_out_of_range, data.group[i],
                         "row " + std::to_string(i) + " has group id " + std::to_string(data.group[i]) +
                             " outside [0, " + std::to_string(groups) + ")");
    }
    if (data.regressors[i].size() != r) {
      throw Error(ErrorKind::shape_mismatch, "row " + std::to_string(i) + " has " +
                                                 std::to_string(data.regressors[i].size()) + " regressors, expected " +
                                                 std::to_string(r));
    }
  }
  const auto n = data.group_sizes();
  for (std::size_t g = 0; g < groups; ++g) {
    if (n[g] == 0) throw IndexedError(ErrorKind::empty_group, g, "group " + std::to_string(g) + " has no observations");
  }
  const auto k_max = *std::max_element(n.begin(), n.end());

  std::vector<double> x(k_max * p * groups, 0.0);
  std::vector<double> y(k_max * groups, 0.0);
  std::vector<std::size_t> fill(groups, 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto g = data.group[i];
    const auto k = fill[g]++;
    x[(k * p + 0) * groups + g] = 1.0;
    for (std::size_t j = 0; j < r; ++j) x[(k * p + j + 1) * groups + g] = data.regressors[i][j];
    y[k * groups + g] = data.outcome[i];
  }
  return {DesignTensor{Tensor({k_max, p, groups}, std::move(x)), n},
          OutcomeTensor{Tensor({k_max, groups}, std::move(y)), n}};
}

/// Separate tallies for the assembly stage (Gram and X^T Y) and the solve
/// stage (inversion and back-substitution). Either pointer may be null.
struct FitCounters {
  OpCounter* assemble = nullptr;
  OpCounter* solve = nullptr;
};

struct FitResult {
  BetaTensor beta;
  GramTensor gram;
  InverseReport inverse;
};

/// Per-group ordinary least squares through the normal equations:
/// beta[., g] = W_g^{-1} sum_k X[k, ., g] Y[k, g].
inline FitResult fit_detailed(const DesignTensor& x, const OutcomeTensor& y, FitCounters counters) {
  if (y.values.rank() != 2 || y.values.extent(0) != x.samples() || y.values.extent(1) != x.groups()) {
    throw Error(ErrorKind::shape_mismatch, "outcome shape " + shape_string(y.values.shape()) +
                                               " does not match design " + shape_string(x.values.shape()));
  }
  const auto p = x.params();
  for (std::size_t g = 0; g < x.groups(); ++g) {
    if (x.valid[g] < p) {
      throw IndexedError(ErrorKind::insufficient_samples, g, "group " + std::to_string(g) + " has " +
                                                                  std::to_string(x.valid[g]) + " samples for " +
                                                                  std::to_string(p) + " parameters");
    }
  }

  auto w = gram(x, counters.assemble);
  auto inv = invert_gram(w, counters.solve);

  static const EinsumSpec xty_spec = parse_einsum("kal,kl->al");
  static const EinsumSpec solve_spec = parse_einsum("abl,bl->al");
  ContractOptions masked;
  masked.ragged = RaggedBound{'k', 'l', x.valid};
  masked.ops = counters.assemble;
  const Tensor xty = contract(xty_spec, {x.values, y.values}, masked);
  ContractOptions plain;
  plain.ops = counters.solve;
  Tensor beta = contract(solve_spec, {inv.inverse, xty}, plain);

  for (double v : beta.data()) {
    if (!std::isfinite(v)) throw Error(ErrorKind::singular_matrix, "non-finite coefficient after solve");
  }
  return {BetaTensor{std::move(beta)}, std::move(w), std::move(inv)};
}

inline FitResult fit_detailed(const DesignTensor& x, const OutcomeTensor& y, OpCounter* ops = nullptr) {
  return fit_detailed(x, y, FitCounters{ops, ops});
}

inline BetaTensor fit(const DesignTensor& x, const OutcomeTensor& y, OpCounter* ops = nullptr) {
  return fit_detailed(x, y, ops).beta;
}

/// N[k, g] = Y[k, g] - sum_a X[k, a, g] beta[a, g]; padding rows stay zero.
inline ResidualTensor residuals(const DesignTensor& x, const BetaTensor& beta, const OutcomeTensor& y) {
  if (beta.values.rank() != 2 || beta.params() != x.params() || beta.groups() != x.groups()) {
    throw Error(ErrorKind::shape_mismatch, "beta shape " + shape_string(beta.values.shape()) +
                                               " does not match design " + shape_string(x.values.shape()));
  }
  static const EinsumSpec spec = parse_einsum("kal,al->kl");
  const Tensor fitted = contract(spec, {x.values, beta.values});
  const auto groups = x.groups();
  std::vector<double> n(fitted.size(), 0.0);
  for (std::size_t k = 0; k < x.samples(); ++k) {
    for (std::size_t g = 0; g < groups; ++g) {
      if (k < x.valid[g]) n[k * groups + g] = y.values.data()[k * groups + g] - fitted.data()[k * groups + g];
    }
  }
  return {Tensor(fitted.shape(), std::move(n)), x.valid};
}

/// Residual variance, per group and pooled over sum_g (n_g - p) degrees of freedom.
inline VarianceEstimate estimate_variance(const ResidualTensor& n, std::size_t p) {
  const auto groups = n.valid.size();
  VarianceEstimate v;
  v.rss.assign(groups, 0.0);
  v.per_group.assign(groups, std::numeric_limits<double>::quiet_NaN());
  double total = 0.0;
  for (std::size_t g = 0; g < groups; ++g) {
    double rss = 0.0;
    for (std::size_t k = 0; k < n.valid[g]; ++k) {
      const double e = n.values.data()[k * groups + g];
      rss += e * e;
    }
    v.rss[g] = rss;
    total += rss;
    const auto df_g = static_cast<long long>(n.valid[g]) - static_cast<long long>(p);
    if (df_g > 0) v.per_group[g] = rss / static_cast<double>(df_g);
    v.df += df_g;
  }
  if (v.df < 1) {
    throw Error(ErrorKind::no_degrees_of_freedom, "residual degrees of freedom " + std::to_string(v.df) + " < 1");
  }
  v.pooled = total / static_cast<double>(v.df);
  return v;
}

}  // namespace tglm
