// Copyright 2026 The FaultLab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace faultlab {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// Dense row-major binary32 array.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> data);

  static Tensor from_rows(std::initializer_list<std::initializer_list<float>> rows);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t numel() const { return data_.size(); }
  /// Size of the last dimension (1 for rank-0).
  std::size_t last_dim() const { return shape_.empty() ? 1 : shape_.back(); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  float* raw() { return data_.data(); }
  const float* raw() const { return data_.data(); }

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  float& at2(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  float at2(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  /// Same data, new shape with equal element count.
  Tensor reshaped(Shape shape) const;

  /// Bitwise comparison of shape and every element (distinguishes -0 and NaN payloads).
  bool bitwise_equal(const Tensor& other) const;

 private:
  Shape shape_;
  std::vector<float> data_;
};

std::uint32_t float_bits(float v);
float bits_float(std::uint32_t bits);

}  // namespace faultlab
