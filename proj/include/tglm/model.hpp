#pragma once

#include <cstddef>
#include <vector>

#include "tglm/tensor.hpp"

namespace tglm {

/// Observations of a grouped regression: one outcome, r regressors and a
/// group id per row.
struct Dataset {
  std::vector<double> outcome;
  std::vector<std::vector<double>> regressors;  ///< one row of length r per observation
  std::vector<std::size_t> group;
  std::size_t group_count = 0;
  std::size_t regressor_count = 0;

  std::size_t size() const noexcept { return outcome.size(); }

  std::vector<std::size_t> group_sizes() const {
    std::vector<std::size_t> n(group_count, 0);
    for (auto g : group) {
      if (g < group_count) ++n[g];
    }
    return n;
  }
};

/// X[k, a, g]: sample k, parameter a (0 is the intercept), group g. Rows at or
/// beyond a group's valid count are zero.
struct DesignTensor {
  Tensor values;
  std::vector<std::size_t> valid;

  std::size_t samples() const { return values.extent(0); }
  std::size_t params() const { return values.extent(1); }
  std::size_t groups() const { return values.extent(2); }
};

/// Y[k, g], zero-padded like the design.
struct OutcomeTensor {
  Tensor values;
  std::vector<std::size_t> valid;
};

/// beta[a, g].
struct BetaTensor {
  Tensor values;

  std::size_t params() const { return values.extent(0); }
  std::size_t groups() const { return values.extent(1); }
};

/// N[k, g] = Y - X beta on valid rows, zero on padding.
struct ResidualTensor {
  Tensor values;
  std::vector<std::size_t> valid;
};

struct VarianceEstimate {
  double pooled = 0.0;
  /// RSS_g / (n_g - p); NaN where a group has no residual degrees of freedom.
  std::vector<double> per_group;
  std::vector<double> rss;
  long long df = 0;
};

/// W[a', a, g] = sum_k X[k, a', g] X[k, a, g].
struct GramTensor {
  Tensor values;

  std::size_t params() const { return values.extent(0); }
  std::size_t groups() const { return values.extent(2); }
};

/// Copies the (row, col) plane of a rank-3 tensor at the given last-axis index.
inline Tensor slice_last(const Tensor& t, std::size_t index) {
  const auto rows = t.extent(0);
  const auto cols = t.extent(1);
  const auto depth = t.extent(2);
  std::vector<double> out(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) out[i * cols + j] = t.data()[(i * cols + j) * depth + index];
  }
  return Tensor({rows, cols}, std::move(out));
}

/// Stacks equally shaped matrices along a new trailing axis.
inline Tensor stack_last(const std::vector<Tensor>& slices) {
  const auto rows = slices.at(0).extent(0);
  const auto cols = slices.at(0).extent(1);
  const auto depth = slices.size();
  std::vector<double> out(rows * cols * depth);
  for (std::size_t g = 0; g < depth; ++g) {
    for (std::size_t i = 0; i < rows * cols; ++i) out[i * depth + g] = slices[g].data()[i];
  }
  return Tensor({rows, cols, depth}, std::move(out));
}

}  // namespace tglm
