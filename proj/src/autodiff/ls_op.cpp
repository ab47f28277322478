#include "lscd/autodiff/ls_op.hpp"

#include <memory>

#include "lscd/lombscargle/periodogram.hpp"

namespace lscd::ad {

Var ls_feature(Var values, const LsFeatureSpec& spec) {
  const Shape3 s = spec.mask.shape();
  if (values.value().size() != s.size()) throw ShapeError("ls_feature: values do not match mask shape");
  auto fixed = std::make_shared<LsFeatureSpec>(spec);
  Values x(s, values.value().to_vector());
  auto p = ls::periodogram(x, fixed->timestamps, fixed->mask, fixed->grid, fixed->center);
  auto feat = ls::spectral_feature(p.power, fixed->options);
  const std::size_t J = fixed->grid.size();
  Tensor y(Shape{s.batch * s.channels, J}, std::move(feat.data()));
  return values.tape->make(std::move(y), {values},
                           [values, fixed, x = std::move(x), power = std::move(p.power)](Tape& tp, std::size_t self) {
                             if (!tp.requires_grad(values)) return;
                             Values up(power.shape(), tp.grad(self).to_vector());
                             auto gp = ls::spectral_feature_vjp(power, fixed->options, up);
                             auto gx = ls::periodogram_vjp(x, fixed->timestamps, fixed->mask, fixed->grid,
                                                           fixed->center, gp);
                             auto& g = tp.grad_of(values.id);
                             for (std::size_t i = 0; i < g.size(); ++i) g[i] += gx[i];
                           });
}

}  // namespace lscd::ad
