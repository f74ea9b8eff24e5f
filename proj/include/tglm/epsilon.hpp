#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "tglm/einsum.hpp"
#include "tglm/error.hpp"
#include "tglm/levi_civita.hpp"
#include "tglm/model.hpp"
#include "tglm/op_counter.hpp"
#include "tglm/tensor.hpp"

namespace tglm {

enum class InverseMethod { epsilon, elimination };

inline const char* to_string(InverseMethod m) { return m == InverseMethod::epsilon ? "epsilon" : "elimination"; }

struct InverseReport {
  Tensor inverse;  ///< (p, p, G)
  std::vector<double> determinant;
  std::vector<InverseMethod> method;
};

inline constexpr double singularity_tolerance = 1e-12;

namespace detail {

inline void require_square(const Tensor& m, const char* who) {
  if (m.rank() != 2 || m.extent(0) != m.extent(1)) {
    throw Error(ErrorKind::shape_mismatch, std::string(who) + " needs a square matrix, got " + shape_string(m.shape()));
  }
}

inline void require_epsilon_extent(std::size_t p) {
  if (p > max_levi_civita_rank) {
    throw Error(ErrorKind::extent_too_large, "epsilon path supports p <= " + std::to_string(max_levi_civita_rank) +
                                                 ", got " + std::to_string(p));
  }
}

inline double factorial(std::size_t n) {
  double f = 1.0;
  for (std::size_t i = 2; i <= n; ++i) f *= static_cast<double>(i);
  return f;
}

/// Maximum absolute row sum.
inline double inf_norm(const Tensor& m) {
  const auto n = m.extent(0);
  const auto cols = m.extent(1);
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < cols; ++j) row += std::abs(m.data()[i * cols + j]);
    best = std::max(best, row);
  }
  return best;
}

/// Full double contraction eps^{a_1..a_p} eps_{b_1..b_p} prod_i W[b_i, a_i],
/// which equals p! det W.
inline double epsilon_bracket(const Tensor& w, const std::vector<SignedPermutation>& perms, OpCounter* ops) {
  const auto p = w.extent(0);
  const auto d = w.data();
  double acc = 0.0;
  for (const auto& a : perms) {
    for (const auto& b : perms) {
      double term = a.sign * b.sign;
      for (std::size_t i = 0; i < p; ++i) term *= d[b.perm[i] * p + a.perm[i]];
      acc += term;
    }
  }
  const auto terms = static_cast<std::uint64_t>(perms.size()) * perms.size();
  count_mul(ops, terms * (p + 1));
  count_add(ops, terms);
  return acc;
}

inline void check_determinant(double det, const Tensor& w) {
  const auto p = static_cast<double>(w.extent(0));
  const double scale = std::max(1.0, std::pow(inf_norm(w), p));
  if (!(std::abs(det) > singularity_tolerance * scale)) {
    throw Error(ErrorKind::singular_matrix, "|det| = " + std::to_string(std::abs(det)) + " below threshold");
  }
}

/// Adjugate over determinant, with the determinant supplied by the caller.
inline Tensor epsilon_inverse_with(const Tensor& w, double det, const std::vector<SignedPermutation>& perms,
                                   OpCounter* ops) {
  const auto p = w.extent(0);
  const auto d = w.data();
  const double scale = 1.0 / (factorial(p - 1) * det);
  count_mul(ops);
  count_div(ops);

  std::vector<double> out(p * p, 0.0);
  for (std::size_t zeta = 0; zeta < p; ++zeta) {
    for (std::size_t mu = 0; mu < p; ++mu) {
      double acc = 0.0;
      std::uint64_t terms = 0;
      for (const auto& a : perms) {
        if (a.perm[0] != zeta) continue;
        for (const auto& b : perms) {
          if (b.perm[0] != mu) continue;
          double term = a.sign * b.sign;
          for (std::size_t i = 1; i < p; ++i) term *= d[b.perm[i] * p + a.perm[i]];
          acc += term;
          ++terms;
        }
      }
      out[zeta * p + mu] = scale * acc;
      count_mul(ops, terms * p + 1);
      count_add(ops, terms);
    }
  }
  return Tensor({p, p}, std::move(out));
}

}  // namespace detail

/// det W through the Levi-Civita double contraction divided by p!.
inline double epsilon_determinant(const Tensor& w, OpCounter* ops = nullptr) {
  detail::require_square(w, "epsilon_determinant");
  const auto p = w.extent(0);
  detail::require_epsilon_extent(p);
  const auto perms = signed_permutations(p);
  const double det = detail::epsilon_bracket(w, perms, ops) / detail::factorial(p);
  detail::count_div(ops);
  return det;
}

/**
 * Inverse of a p x p matrix (p <= 6) as the epsilon-contracted adjugate:
 *
 *   inv[z][m] = eps^{z a_2..a_p} eps_{m b_2..b_p} W[b_2,a_2]..W[b_p,a_p] / ((p-1)! det W)
 *
 * The trailing product uses fresh summation labels per factor. For p = 2 this
 * is 2 / (eps eps W W) * eps eps W.
 */
inline Tensor epsilon_inverse(const Tensor& w, OpCounter* ops = nullptr) {
  detail::require_square(w, "epsilon_inverse");
  const auto p = w.extent(0);
  detail::require_epsilon_extent(p);
  const auto perms = signed_permutations(p);
  const double det = detail::epsilon_bracket(w, perms, ops) / detail::factorial(p);
  detail::count_div(ops);
  detail::check_determinant(det, w);
  return detail::epsilon_inverse_with(w, det, perms, ops);
}

struct EliminationResult {
  Tensor inverse;
  double determinant;
};

/// Gauss-Jordan with partial pivoting. A pivot at or below 1e-12 times the
/// infinity norm is treated as singular.
inline EliminationResult elimination_inverse_det(const Tensor& w, OpCounter* ops = nullptr) {
  detail::require_square(w, "elimination_inverse");
  const auto n = w.extent(0);
  const auto width = 2 * n;
  std::vector<double> a(n * width, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i * width + j] = w.data()[i * n + j];
    a[i * width + n + i] = 1.0;
  }
  const double threshold = singularity_tolerance * detail::inf_norm(w);
  double det = 1.0;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * width + col]) > std::abs(a[pivot * width + col])) pivot = r;
    }
    const double pv = a[pivot * width + col];
    if (!(std::abs(pv) > threshold) || pv == 0.0) {
      throw Error(ErrorKind::singular_matrix, "pivot " + std::to_string(pv) + " in column " + std::to_string(col));
    }
    if (pivot != col) {
      for (std::size_t j = 0; j < width; ++j) std::swap(a[col * width + j], a[pivot * width + j]);
      det = -det;
    }
    det *= pv;
    detail::count_mul(ops);
    for (std::size_t j = 0; j < width; ++j) a[col * width + j] /= pv;
    detail::count_div(ops, width);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = a[r * width + col];
      for (std::size_t j = 0; j < width; ++j) a[r * width + j] -= factor * a[col * width + j];
      detail::count_mul(ops, width);
      detail::count_add(ops, width);
    }
  }

  std::vector<double> inv(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) inv[i * n + j] = a[i * width + n + j];
  }
  return {Tensor({n, n}, std::move(inv)), det};
}

inline Tensor elimination_inverse(const Tensor& w, OpCounter* ops = nullptr) {
  return elimination_inverse_det(w, ops).inverse;
}

/// Determinant as the signed product of LU pivots (partial pivoting). Returns 0
/// for exactly singular input instead of throwing.
inline double lu_determinant(const Tensor& w) {
  detail::require_square(w, "lu_determinant");
  const auto n = w.extent(0);
  std::vector<double> a(w.data().begin(), w.data().end());
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    }
    if (a[pivot * n + col] == 0.0) return 0.0;
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[col * n + j], a[pivot * n + j]);
      det = -det;
    }
    det *= a[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (std::size_t j = col; j < n; ++j) a[r * n + j] -= f * a[col * n + j];
    }
  }
  return det;
}

/// Per-group Gram stack via the masked contraction "kal,kbl->abl"; only the
/// first valid[g] samples of each group contribute.
inline GramTensor gram(const DesignTensor& x, OpCounter* ops = nullptr) {
  if (x.values.rank() != 3) throw Error(ErrorKind::shape_mismatch, "design tensor must be rank 3");
  static const EinsumSpec spec = parse_einsum("kal,kbl->abl");
  ContractOptions opt;
  opt.ragged = RaggedBound{'k', 'l', x.valid};
  opt.ops = ops;
  return {contract(spec, {x.values, x.values}, opt)};
}

/// Inverts every group slice of @p w. The epsilon path runs for p <= 6 and
/// elimination beyond; a singular slice raises SingularGram naming its group.
inline InverseReport invert_gram(const GramTensor& w, OpCounter* ops = nullptr) {
  const auto p = w.params();
  const auto groups = w.groups();
  std::vector<Tensor> slices;
  InverseReport report;
  const bool use_epsilon = p <= max_levi_civita_rank;
  const auto perms = use_epsilon ? signed_permutations(p) : std::vector<SignedPermutation>{};

  for (std::size_t g = 0; g < groups; ++g) {
    const Tensor slice = slice_last(w.values, g);
    try {
      if (use_epsilon) {
        const double det = detail::epsilon_bracket(slice, perms, ops) / detail::factorial(p);
        detail::count_div(ops);
        detail::check_determinant(det, slice);
        slices.push_back(detail::epsilon_inverse_with(slice, det, perms, ops));
        report.determinant.push_back(det);
        report.method.push_back(InverseMethod::epsilon);
      } else {
        auto r = elimination_inverse_det(slice, ops);
        slices.push_back(std::move(r.inverse));
        report.determinant.push_back(r.determinant);
        report.method.push_back(InverseMethod::elimination);
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::singular_matrix) throw;
      throw IndexedError(ErrorKind::singular_gram, g, "group " + std::to_string(g) + " Gram matrix is singular (" + e.what() + ")");
    }
  }
  report.inverse = stack_last(slices);
  return report;
}

}  // namespace tglm
