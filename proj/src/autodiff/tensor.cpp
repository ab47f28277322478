#include "lscd/autodiff/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace lscd::ad {

std::size_t numel(const Shape& s) {
  std::size_t n = 1;
  for (auto d : s) n *= d;
  return n;
}

std::string shape_string(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? ", " : "") + std::to_string(s[i]);
  return out + "]";
}

Tensor::Tensor(Shape s, Storage d) : shape(std::move(s)), data(std::move(d)) {
  if (data.size() != numel(shape)) throw ShapeError("Tensor: data size does not match shape " + shape_string(shape));
}

bool Tensor::all_finite() const {
  return std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace lscd::ad
