#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lscd/core/error.hpp"

namespace lscd {

/// Dimensions of a batch tensor: samples x channels x steps.
struct Shape3 {
  std::size_t batch = 0;
  std::size_t channels = 0;
  std::size_t steps = 0;

  std::size_t size() const { return batch * channels * steps; }
  bool operator==(const Shape3&) const = default;
};

/// Dense row-major [B, K, L] array. Rows (b, k) are contiguous along L.
template <typename T>
class Array3 {
 public:
  Array3() = default;
  explicit Array3(Shape3 shape, T fill = T{}) : shape_(shape), data_(shape.size(), fill) {}
  Array3(Shape3 shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.size()) throw ShapeError("Array3: data size does not match shape");
  }

  const Shape3& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(std::size_t b, std::size_t k, std::size_t l) { return data_[index(b, k, l)]; }
  const T& operator()(std::size_t b, std::size_t k, std::size_t l) const { return data_[index(b, k, l)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> row(std::size_t b, std::size_t k) { return {data_.data() + index(b, k, 0), shape_.steps}; }
  std::span<const T> row(std::size_t b, std::size_t k) const {
    return {data_.data() + index(b, k, 0), shape_.steps};
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  std::size_t index(std::size_t b, std::size_t k, std::size_t l) const {
    return (b * shape_.channels + k) * shape_.steps + l;
  }

  bool operator==(const Array3&) const = default;

 private:
  Shape3 shape_;
  std::vector<T> data_;
};

using Values = Array3<double>;
using Mask = Array3<std::uint8_t>;

}  // namespace lscd
