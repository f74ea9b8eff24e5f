#pragma once

#include <cstdint>

namespace tglm {

/// Exact arithmetic tally filled in by instrumented kernels. Each run owns its
/// own counter; kernels take a nullable pointer and skip counting when null.
struct OpCounter {
  std::uint64_t multiplies = 0;
  std::uint64_t adds = 0;
  std::uint64_t divides = 0;

  std::uint64_t total() const noexcept { return multiplies + adds + divides; }

  OpCounter& operator+=(const OpCounter& o) noexcept {
    multiplies += o.multiplies;
    adds += o.adds;
    divides += o.divides;
    return *this;
  }

  friend bool operator==(const OpCounter&, const OpCounter&) = default;
};

namespace detail {
inline void count_mul(OpCounter* ops, std::uint64_t n = 1) noexcept {
  if (ops) ops->multiplies += n;
}
inline void count_add(OpCounter* ops, std::uint64_t n = 1) noexcept {
  if (ops) ops->adds += n;
}
inline void count_div(OpCounter* ops, std::uint64_t n = 1) noexcept {
  if (ops) ops->divides += n;
}
}  // namespace detail

}  // namespace tglm
