#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tglm/error.hpp"
#include "tglm/op_counter.hpp"
#include "tglm/tensor.hpp"

namespace tglm {

/**
 * Parsed Einstein-summation expression such as "kal,al->kl".
 *
 * A label that appears in the output is free: it indexes the result and is
 * never summed, even when it repeats across operands (the group label in
 * "kal,al->kl"). Every other label is summed. Index variance (upper/lower)
 * is not modelled; all axes are plain.
 */
struct EinsumSpec {
  std::vector<std::string> operands;
  std::string output;
  /// Summation labels in order of first appearance across the operands.
  std::string summation;

  std::string free() const { return output; }
  bool is_summed(char label) const { return summation.find(label) != std::string::npos; }
  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < operands.size(); ++i) s += (i ? "," : "") + operands[i];
    return s + "->" + output;
  }
};

/// Grammar: `subscripts ("," subscripts)* "->" subscripts`, subscripts = [A-Za-z]*.
/// Whitespace anywhere is ignored.
inline EinsumSpec parse_einsum(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  }
  const auto arrow = s.find("->");
  if (arrow == std::string::npos) throw Error(ErrorKind::parse_error, "missing '->' in \"" + std::string(text) + "\"");
  if (s.find("->", arrow + 2) != std::string::npos) {
    throw Error(ErrorKind::parse_error, "more than one '->' in \"" + std::string(text) + "\"");
  }

  auto check_labels = [&](std::string_view sub) {
    for (char c : sub) {
      if (!std::isalpha(static_cast<unsigned char>(c))) {
        throw Error(ErrorKind::parse_error, std::string("unexpected character '") + c + "' in \"" + std::string(text) + "\"");
      }
    }
  };

  EinsumSpec spec;
  const std::string lhs = s.substr(0, arrow);
  spec.output = s.substr(arrow + 2);
  std::size_t start = 0;
  while (true) {
    const auto comma = lhs.find(',', start);
    spec.operands.push_back(lhs.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    check_labels(spec.operands.back());
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  check_labels(spec.output);

  std::string seen;
  for (const auto& op : spec.operands) {
    for (char c : op) {
      if (seen.find(c) == std::string::npos) seen += c;
    }
  }
  for (std::size_t i = 0; i < spec.output.size(); ++i) {
    const char c = spec.output[i];
    if (seen.find(c) == std::string::npos) {
      throw Error(ErrorKind::invalid_output_label, std::string("output label '") + c + "' does not appear in any operand");
    }
    if (spec.output.find(c, i + 1) != std::string::npos) {
      throw Error(ErrorKind::duplicate_output_label, std::string("output label '") + c + "' repeats");
    }
  }
  for (char c : seen) {
    if (spec.output.find(c) == std::string::npos) spec.summation += c;
  }
  return spec;
}

/// Limits a summed label to a per-slice extent selected by a free label.
/// Used for ragged groups: samples k of group l run over [0, extents[l]).
struct RaggedBound {
  char label;
  char by;
  std::vector<std::size_t> extents;
};

struct ContractOptions {
  std::optional<RaggedBound> ragged;
  OpCounter* ops = nullptr;
};

/// Resolved extents and per-operand strides for a spec against concrete shapes.
class ContractionPlan {
 public:
  ContractionPlan(EinsumSpec spec, std::span<const Shape> shapes) : spec_(std::move(spec)) {
    if (shapes.size() != spec_.operands.size()) {
      throw Error(ErrorKind::operand_count_mismatch, "spec \"" + spec_.to_string() + "\" expects " +
                                                         std::to_string(spec_.operands.size()) + " operands, got " +
                                                         std::to_string(shapes.size()));
    }
    labels_ = spec_.output + spec_.summation;
    extents_.assign(labels_.size(), 0);
    strides_.assign(shapes.size(), std::vector<std::size_t>(labels_.size(), 0));

    for (std::size_t op = 0; op < shapes.size(); ++op) {
      const auto& sub = spec_.operands[op];
      const auto& shape = shapes[op];
      if (sub.size() != shape.size()) {
        throw Error(ErrorKind::shape_mismatch, "operand " + std::to_string(op) + " has rank " +
                                                   std::to_string(shape.size()) + " but subscript \"" + sub + "\"");
      }
      const auto axis_strides = row_major_strides(shape);
      for (std::size_t axis = 0; axis < sub.size(); ++axis) {
        const auto slot = labels_.find(sub[axis]);
        if (extents_[slot] == 0) {
          extents_[slot] = shape[axis];
        } else if (extents_[slot] != shape[axis]) {
          throw Error(ErrorKind::extent_mismatch, std::string("label '") + sub[axis] + "' bound to extents " +
                                                      std::to_string(extents_[slot]) + " and " +
                                                      std::to_string(shape[axis]));
        }
        strides_[op][slot] += axis_strides[axis];
      }
    }
  }

  const EinsumSpec& spec() const noexcept { return spec_; }
  /// Output labels first, then summation labels.
  const std::string& labels() const noexcept { return labels_; }
  std::size_t extent(char label) const { return extents_.at(labels_.find(label)); }
  std::span<const std::size_t> extents() const noexcept { return extents_; }
  std::span<const std::size_t> strides(std::size_t operand) const { return strides_.at(operand); }

  Shape output_shape() const {
    return Shape(extents_.begin(), extents_.begin() + static_cast<std::ptrdiff_t>(spec_.output.size()));
  }

 private:
  EinsumSpec spec_;
  std::string labels_;
  std::vector<std::size_t> extents_;
  std::vector<std::vector<std::size_t>> strides_;
};

/**
 * Evaluates @p spec over @p operands with a single fused loop nest.
 *
 * Output elements are visited in row-major order; for each, summation labels
 * run row-major in first-appearance order and each term is the left-to-right
 * product of the operand elements. The order is fixed so results are
 * bit-reproducible.
 */
inline Tensor contract(const EinsumSpec& spec, std::span<const Tensor> operands, const ContractOptions& options = {}) {
  std::vector<Shape> shapes;
  shapes.reserve(operands.size());
  for (const auto& t : operands) shapes.push_back(t.shape());
  const ContractionPlan plan(spec, shapes);

  const std::size_t n_free = spec.output.size();
  const std::size_t n_sum = spec.summation.size();
  const auto extents = plan.extents();
  const Shape out_shape = plan.output_shape();
  const Shape sum_shape(extents.begin() + static_cast<std::ptrdiff_t>(n_free), extents.end());

  std::size_t ragged_slot = 0;
  std::size_t ragged_by = 0;
  if (options.ragged) {
    const auto& rb = *options.ragged;
    const auto s = spec.summation.find(rb.label);
    const auto b = spec.output.find(rb.by);
    if (s == std::string::npos || b == std::string::npos) {
      throw Error(ErrorKind::shape_mismatch, "ragged bound needs a summed label bounded by a free label");
    }
    if (rb.extents.size() != extents[b]) {
      throw Error(ErrorKind::shape_mismatch, "ragged bound has " + std::to_string(rb.extents.size()) +
                                                 " extents for label of extent " + std::to_string(extents[b]));
    }
    ragged_slot = s;
    ragged_by = b;
  }

  std::vector<double> out(shape_volume(out_shape), 0.0);
  std::vector<std::size_t> base(operands.size());
  std::uint64_t terms = 0;

  std::size_t flat = 0;
  for (IndexCounter free_it(out_shape); !free_it.done(); free_it.next(), ++flat) {
    const auto fidx = free_it.index();
    for (std::size_t op = 0; op < operands.size(); ++op) {
      const auto st = plan.strides(op);
      std::size_t off = 0;
      for (std::size_t i = 0; i < n_free; ++i) off += fidx[i] * st[i];
      base[op] = off;
    }

    Shape bounded = sum_shape;
    if (options.ragged) {
      bounded[ragged_slot] = std::min(bounded[ragged_slot], options.ragged->extents[fidx[ragged_by]]);
      if (bounded[ragged_slot] == 0) continue;
    }

    double acc = 0.0;
    for (IndexCounter sum_it(bounded); !sum_it.done(); sum_it.next()) {
      const auto sidx = sum_it.index();
      double term = 1.0;
      for (std::size_t op = 0; op < operands.size(); ++op) {
        const auto st = plan.strides(op);
        std::size_t off = base[op];
        for (std::size_t i = 0; i < n_sum; ++i) off += sidx[i] * st[n_free + i];
        const double v = operands[op].data()[off];
        term = op == 0 ? v : term * v;
      }
      acc += term;
      ++terms;
    }
    out[flat] = acc;
  }

  detail::count_mul(options.ops, terms * (operands.empty() ? 0 : operands.size() - 1));
  detail::count_add(options.ops, terms);
  return Tensor(out_shape, std::move(out));
}

inline Tensor contract(const EinsumSpec& spec, std::initializer_list<Tensor> operands, const ContractOptions& options = {}) {
  return contract(spec, std::span<const Tensor>(operands.begin(), operands.size()), options);
}

inline Tensor einsum(std::string_view spec, std::span<const Tensor> operands, const ContractOptions& options = {}) {
  return contract(parse_einsum(spec), operands, options);
}

inline Tensor einsum(std::string_view spec, std::initializer_list<Tensor> operands, const ContractOptions& options = {}) {
  return contract(parse_einsum(spec), std::span<const Tensor>(operands.begin(), operands.size()), options);
}

}  // namespace tglm
