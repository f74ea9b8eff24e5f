#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "tglm/error.hpp"

namespace tglm {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_volume(std::span<const std::size_t> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

inline std::string shape_string(std::span<const std::size_t> shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ')';
  return os.str();
}

/// Row-major strides for @p shape; the last axis is contiguous.
inline std::vector<std::size_t> row_major_strides(std::span<const std::size_t> shape) {
  std::vector<std::size_t> strides(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) strides[i - 1] = strides[i] * shape[i];
  return strides;
}

/**
 * Dense row-major array of doubles.
 *
 * A tensor is immutable once built: every operation in this library takes
 * tensors by const reference and returns fresh ones. Rank-0 tensors hold a
 * single scalar (the empty product is 1).
 */
class Tensor {
 public:
  Tensor() : data_(1, 0.0) {}

  Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    for (auto extent : shape_) {
      if (extent == 0) throw Error(ErrorKind::shape_mismatch, "zero extent in shape " + shape_string(shape_));
    }
    if (data_.size() != shape_volume(shape_)) {
      throw Error(ErrorKind::shape_mismatch, "data length " + std::to_string(data_.size()) +
                                                 " does not match shape " + shape_string(shape_));
    }
    strides_ = row_major_strides(shape_);
  }

  static Tensor zeros(Shape shape) {
    const auto n = shape_volume(shape);
    return Tensor(std::move(shape), std::vector<double>(n, 0.0));
  }

  static Tensor filled(Shape shape, double value) {
    const auto n = shape_volume(shape);
    return Tensor(std::move(shape), std::vector<double>(n, value));
  }

  static Tensor scalar(double value) { return Tensor({}, {value}); }

  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  const Shape& shape() const noexcept { return shape_; }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::span<const std::size_t> strides() const noexcept { return strides_; }
  std::span<const double> data() const noexcept { return data_; }

  std::size_t offset(std::span<const std::size_t> index) const {
    if (index.size() != shape_.size()) {
      throw Error(ErrorKind::shape_mismatch, "index rank " + std::to_string(index.size()) +
                                                 " vs tensor rank " + std::to_string(shape_.size()));
    }
    std::size_t off = 0;
    for (std::size_t i = 0; i < index.size(); ++i) {
      if (index[i] >= shape_[i]) throw Error(ErrorKind::index_out_of_range, "index out of range on axis " + std::to_string(i));
      off += index[i] * strides_[i];
    }
    return off;
  }

  double at(std::span<const std::size_t> index) const { return data_[offset(index)]; }
  double at(std::initializer_list<std::size_t> index) const {
    return at(std::span<const std::size_t>(index.begin(), index.size()));
  }

  template <typename... I>
  double operator()(I... index) const {
    const std::size_t idx[] = {static_cast<std::size_t>(index)...};
    return at(std::span<const std::size_t>(idx, sizeof...(I)));
  }

  /// Scalar value of a rank-0 (or single element) tensor.
  double item() const {
    if (data_.size() != 1) throw Error(ErrorKind::shape_mismatch, "item() on tensor of shape " + shape_string(shape_));
    return data_[0];
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<std::size_t> strides_;
  std::vector<double> data_;
};

/// Multi-index odometer over a shape in row-major order.
class IndexCounter {
 public:
  explicit IndexCounter(Shape shape) : shape_(std::move(shape)), index_(shape_.size(), 0) {
    done_ = shape_volume(shape_) == 0;
  }

  std::span<const std::size_t> index() const noexcept { return index_; }
  bool done() const noexcept { return done_; }

  void next() {
    for (std::size_t i = shape_.size(); i-- > 0;) {
      if (++index_[i] < shape_[i]) return;
      index_[i] = 0;
    }
    done_ = true;
  }

 private:
  Shape shape_;
  std::vector<std::size_t> index_;
  bool done_ = false;
};

}  // namespace tglm
