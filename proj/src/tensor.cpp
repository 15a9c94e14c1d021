// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#include "faultlab/tensor.hpp"

#include <bit>
#include <cstring>

#include "faultlab/error.hpp"

namespace faultlab {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_numel(shape_) != data_.size()) {
    throw DimensionError("tensor shape " + shape_to_string(shape_) + " does not match " +
                         std::to_string(data_.size()) + " elements");
  }
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<float>> rows) {
  std::vector<float> data;
  std::size_t cols = rows.size() ? rows.begin()->size() : 0;
  for (const auto& r : rows) {
    if (r.size() != cols) throw DimensionError("ragged rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor({rows.size(), cols}, std::move(data));
}

Tensor Tensor::reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

bool Tensor::bitwise_equal(const Tensor& other) const {
  return shape_ == other.shape_ &&
         (data_.empty() || std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0);
}

std::uint32_t float_bits(float v) { return std::bit_cast<std::uint32_t>(v); }
float bits_float(std::uint32_t bits) { return std::bit_cast<float>(bits); }

}  // namespace faultlab
