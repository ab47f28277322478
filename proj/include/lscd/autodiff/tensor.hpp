#pragma once

#include <cstddef>
#include <new>
#include <string>
#include <vector>

#include "lscd/core/error.hpp"

namespace lscd::ad {

using Shape = std::vector<std::size_t>;

/// Fixed 64-byte alignment keeps vectorized kernels on the same code path
/// for every buffer, so results do not depend on where memory lands.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) { ::operator delete(p, kAlign); }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

using Storage = std::vector<double, AlignedAllocator<double>>;

std::size_t numel(const Shape& s);
std::string shape_string(const Shape& s);

/// Dense row-major tensor. Two-dimensional views treat the last axis as
/// columns and fold every leading axis into rows.
struct Tensor {
  Shape shape;
  Storage data;

  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0) : shape(std::move(s)), data(numel(shape), fill) {}
  Tensor(Shape s, Storage d);
  Tensor(Shape s, const std::vector<double>& d) : Tensor(std::move(s), Storage(d.begin(), d.end())) {}

  std::vector<double> to_vector() const { return {data.begin(), data.end()}; }

  std::size_t size() const { return data.size(); }
  std::size_t cols() const { return shape.empty() ? 1 : shape.back(); }
  std::size_t rows() const { return cols() == 0 ? 0 : size() / cols(); }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }
  double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

  static Tensor scalar(double v) { return Tensor(Shape{1}, v); }
  bool all_finite() const;
};

}  // namespace lscd::ad
