#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "tglm/tensor.hpp"

namespace tglm::testing {

inline Tensor random_tensor(std::mt19937_64& rng, const Shape& shape, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(shape_volume(shape));
  for (auto& x : v) x = u(rng);
  return Tensor(shape, std::move(v));
}

/// Random matrix with a boosted diagonal so it is comfortably invertible.
inline Tensor well_conditioned(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n * n);
  for (auto& x : v) x = u(rng);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] += (u(rng) < 0 ? -1.0 : 1.0) * (static_cast<double>(n) + 1.0);
  return Tensor({n, n}, std::move(v));
}

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  const auto n = a.extent(0), m = a.extent(1), k = b.extent(1);
  std::vector<double> out(n * k, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t l = 0; l < m; ++l) out[i * k + j] += a(i, l) * b(l, j);
  return Tensor({n, k}, std::move(out));
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline double max_abs(std::span<const double> a) {
  double d = 0.0;
  for (double x : a) d = std::max(d, std::abs(x));
  return d;
}

/// Entrywise relative error, guarded by the larger magnitude of the pair.
inline double max_entry_rel_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double s = std::max({std::abs(a[i]), std::abs(b[i]), 1e-300});
    d = std::max(d, std::abs(a[i] - b[i]) / s);
  }
  return d;
}

inline double identity_deviation(const Tensor& m) {
  const auto n = m.extent(0);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d = std::max(d, std::abs(m(i, j) - (i == j ? 1.0 : 0.0)));
  return d;
}

}  // namespace tglm::testing
