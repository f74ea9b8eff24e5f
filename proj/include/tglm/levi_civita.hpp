#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "tglm/error.hpp"
#include "tglm/tensor.hpp"

namespace tglm {

inline constexpr std::size_t max_levi_civita_rank = 6;

/// Sign of @p index viewed as a permutation of 0..n-1, or 0 if any entry repeats
/// or falls outside the range.
inline int permutation_sign(std::span<const std::size_t> index) {
  const std::size_t n = index.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (index[i] >= n) return 0;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (index[i] == index[j]) return 0;
    }
  }
  std::size_t inversions = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) inversions += index[i] > index[j];
  }
  return inversions % 2 == 0 ? 1 : -1;
}

struct SignedPermutation {
  std::vector<std::size_t> perm;
  double sign;
};

/// All permutations of 0..n-1 in lexicographic order, i.e. the nonzero entries
/// of the rank-n Levi-Civita symbol in row-major order.
inline std::vector<SignedPermutation> signed_permutations(std::size_t n) {
  std::vector<SignedPermutation> out;
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  do {
    out.push_back({p, static_cast<double>(permutation_sign(p))});
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

/// Dense rank-n totally antisymmetric symbol with extent n on every axis.
inline Tensor levi_civita(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::shape_mismatch, "levi_civita needs n >= 1");
  if (n > max_levi_civita_rank) {
    throw Error(ErrorKind::extent_too_large, "levi_civita capped at n = " + std::to_string(max_levi_civita_rank) +
                                                 ", got " + std::to_string(n));
  }
  const Shape shape(n, n);
  std::vector<double> data;
  data.reserve(shape_volume(shape));
  for (IndexCounter it(shape); !it.done(); it.next()) data.push_back(permutation_sign(it.index()));
  return Tensor(shape, std::move(data));
}

}  // namespace tglm
