#include "lscd/autodiff/ops.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace lscd::ad {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;

MapC as_mat(const Tensor& t) { return MapC(t.data.data(), t.rows(), t.cols()); }
Map as_mat(Tensor& t) { return Map(t.data.data(), t.rows(), t.cols()); }

void require_same(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
}

// Elementwise unary op: f gives the value, df the derivative from (x, y).
template <typename F, typename DF>
Var unary(Var x, F f, DF df) {
  const Tensor& xv = x.value();
  Tensor y(xv.shape);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(xv[i]);
  return x.tape->make(std::move(y), {x}, [x, df](Tape& tp, std::size_t self) {
    if (!tp.requires_grad(x)) return;
    const auto& g = tp.grad(self);
    const auto& xv = tp.value(x.id);
    const auto& yv = tp.value(self);
    auto& gx = tp.grad_of(x.id);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * df(xv[i], yv[i]);
  });
}

}  // namespace

Var add(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const bool bcast = av.shape != bv.shape;
  if (bcast && !(bv.shape.size() == 1 && bv.size() == av.cols()))
    throw ShapeError("add: cannot broadcast " + shape_string(bv.shape) + " onto " + shape_string(av.shape));
  Tensor y = av;
  const std::size_t c = bv.size();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[bcast ? i % c : i];
  return a.tape->make(std::move(y), {a, b}, [a, b, bcast, c](Tape& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    if (tp.requires_grad(a)) {
      auto& ga = tp.grad_of(a.id);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (tp.requires_grad(b)) {
      auto& gb = tp.grad_of(b.id);
      for (std::size_t i = 0; i < g.size(); ++i) gb[bcast ? i % c : i] += g[i];
    }
  });
}

Var sub(Var a, Var b) {
  require_same(a, b, "sub");
  Tensor y = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= bv[i];
  return a.tape->make(std::move(y), {a, b}, [a, b](Tape& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    if (tp.requires_grad(a)) {
      auto& ga = tp.grad_of(a.id);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (tp.requires_grad(b)) {
      auto& gb = tp.grad_of(b.id);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same(a, b, "mul");
  Tensor y = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= bv[i];
  return a.tape->make(std::move(y), {a, b}, [a, b](Tape& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    if (tp.requires_grad(a)) {
      const auto& bv = tp.value(b.id);
      auto& ga = tp.grad_of(a.id);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (tp.requires_grad(b)) {
      const auto& av = tp.value(a.id);
      auto& gb = tp.grad_of(b.id);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var scale(Var a, double s) {
  return unary(a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var add_scalar(Var a, double s) {
  return unary(a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Var square(Var a) {
  return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var relu(Var x) {
  return unary(x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var gelu(Var x) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  return unary(
      x, [](double v) { return 0.5 * v * (1.0 + std::erf(v * inv_sqrt2)); },
      [inv_sqrt_2pi](double v, double) {
        return 0.5 * (1.0 + std::erf(v * inv_sqrt2)) + v * inv_sqrt_2pi * std::exp(-0.5 * v * v);
      });
}

Var sigmoid(Var x) {
  return unary(x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); }, [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var x) {
  return unary(x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var silu(Var x) {
  return unary(
      x, [](double v) { return v / (1.0 + std::exp(-v)); },
      [](double v, double) {
        const double s = 1.0 / (1.0 + std::exp(-v));
        return s * (1.0 + v * (1.0 - s));
      });
}

Var matmul(Var a, Var b) {
  const auto& av = a.value();
  const auto& bv = b.value();
  if (av.shape.size() != 2 || bv.shape.size() != 2 || av.shape[1] != bv.shape[0])
    throw ShapeError("matmul: incompatible shapes " + shape_string(av.shape) + " x " + shape_string(bv.shape));
  Tensor y(Shape{av.shape[0], bv.shape[1]});
  as_mat(y).noalias() = as_mat(av) * as_mat(bv);
  return a.tape->make(std::move(y), {a, b}, [a, b](Tape& tp, std::size_t self) {
    auto g = as_mat(tp.grad(self));
    if (tp.requires_grad(a)) as_mat(tp.grad_of(a.id)).noalias() += g * as_mat(tp.value(b.id)).transpose();
    if (tp.requires_grad(b)) as_mat(tp.grad_of(b.id)).noalias() += as_mat(tp.value(a.id)).transpose() * g;
  });
}

Var linear(Var x, Var w, Var b) {
  const auto& xv = x.value();
  const auto& wv = w.value();
  const auto& bv = b.value();
  if (wv.shape.size() != 2 || xv.cols() != wv.shape[0] || bv.size() != wv.shape[1])
    throw ShapeError("linear: x " + shape_string(xv.shape) + ", w " + shape_string(wv.shape) + ", b " +
                     shape_string(bv.shape));
  Shape out_shape = xv.shape;
  out_shape.back() = wv.shape[1];
  Tensor y(out_shape);
  auto ym = as_mat(y);
  ym.noalias() = as_mat(xv) * as_mat(wv);
  ym.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bv.data.data(), bv.size());
  return x.tape->make(std::move(y), {x, w, b}, [x, w, b](Tape& tp, std::size_t self) {
    auto g = as_mat(tp.grad(self));
    if (tp.requires_grad(x)) as_mat(tp.grad_of(x.id)).noalias() += g * as_mat(tp.value(w.id)).transpose();
    if (tp.requires_grad(w)) as_mat(tp.grad_of(w.id)).noalias() += as_mat(tp.value(x.id)).transpose() * g;
    if (tp.requires_grad(b)) {
      auto& gb = tp.grad_of(b.id);
      Eigen::Map<Eigen::RowVectorXd>(gb.data.data(), gb.size()) += g.colwise().sum();
    }
  });
}

Var softmax_rows(Var x) {
  const auto& xv = x.value();
  Tensor y(xv.shape);
  const std::size_t R = xv.rows(), C = xv.cols();
  for (std::size_t r = 0; r < R; ++r) {
    double m = -INFINITY;
    for (std::size_t c = 0; c < C; ++c) m = std::max(m, xv.at(r, c));
    double s = 0.0;
    for (std::size_t c = 0; c < C; ++c) s += (y.at(r, c) = std::exp(xv.at(r, c) - m));
    for (std::size_t c = 0; c < C; ++c) y.at(r, c) /= s;
  }
  return x.tape->make(std::move(y), {x}, [x](Tape& tp, std::size_t self) {
    if (!tp.requires_grad(x)) return;
    const auto& g = tp.grad(self);
    const auto& y = tp.value(self);
    auto& gx = tp.grad_of(x.id);
    const std::size_t R = y.rows(), C = y.cols();
    for (std::size_t r = 0; r < R; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < C; ++c) dot += g.at(r, c) * y.at(r, c);
      for (std::size_t c = 0; c < C; ++c) gx.at(r, c) += y.at(r, c) * (g.at(r, c) - dot);
    }
  });
}

Var layernorm_rows(Var x, Var gamma, Var beta, double eps) {
  const auto& xv = x.value();
  const std::size_t R = xv.rows(), C = xv.cols();
  if (gamma.value().size() != C || beta.value().size() != C) throw ShapeError("layernorm_rows: affine size mismatch");
  Tensor y(xv.shape);
  Tensor xhat(xv.shape);
  std::vector<double> inv_std(R);
  const auto& gv = gamma.value();
  const auto& bv = beta.value();
  for (std::size_t r = 0; r < R; ++r) {
    double m = 0.0;
    for (std::size_t c = 0; c < C; ++c) m += xv.at(r, c);
    m /= static_cast<double>(C);
    double var = 0.0;
    for (std::size_t c = 0; c < C; ++c) var += (xv.at(r, c) - m) * (xv.at(r, c) - m);
    var /= static_cast<double>(C);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < C; ++c) {
      xhat.at(r, c) = (xv.at(r, c) - m) * inv_std[r];
      y.at(r, c) = xhat.at(r, c) * gv[c] + bv[c];
    }
  }
  return x.tape->make(
      std::move(y), {x, gamma, beta},
      [x, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape& tp, std::size_t self) {
        const auto& g = tp.grad(self);
        const std::size_t R = g.rows(), C = g.cols();
        if (tp.requires_grad(gamma) || tp.requires_grad(beta)) {
          auto& gg = tp.grad_of(gamma.id);
          auto& gb = tp.grad_of(beta.id);
          for (std::size_t r = 0; r < R; ++r)
            for (std::size_t c = 0; c < C; ++c) {
              gg[c] += g.at(r, c) * xhat.at(r, c);
              gb[c] += g.at(r, c);
            }
        }
        if (!tp.requires_grad(x)) return;
        const auto& gv = tp.value(gamma.id);
        auto& gx = tp.grad_of(x.id);
        std::vector<double> dxh(C);
        for (std::size_t r = 0; r < R; ++r) {
          double m1 = 0.0, m2 = 0.0;
          for (std::size_t c = 0; c < C; ++c) {
            dxh[c] = g.at(r, c) * gv[c];
            m1 += dxh[c];
            m2 += dxh[c] * xhat.at(r, c);
          }
          m1 /= static_cast<double>(C);
          m2 /= static_cast<double>(C);
          for (std::size_t c = 0; c < C; ++c) gx.at(r, c) += inv_std[r] * (dxh[c] - m1 - xhat.at(r, c) * m2);
        }
      });
}

Var reshape(Var x, Shape shape) {
  if (numel(shape) != x.value().size())
    throw ShapeError("reshape: " + shape_string(x.shape()) + " -> " + shape_string(shape));
  Tensor y(std::move(shape), x.value().data);
  return x.tape->make(std::move(y), {x}, [x](Tape& tp, std::size_t self) {
    if (!tp.requires_grad(x)) return;
    const auto& g = tp.grad(self);
    auto& gx = tp.grad_of(x.id);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

Var transpose2d(Var x) {
  const auto& xv = x.value();
  if (xv.shape.size() != 2) throw ShapeError("transpose2d: expects a matrix, got " + shape_string(xv.shape));
  Tensor y(Shape{xv.shape[1], xv.shape[0]});
  as_mat(y) = as_mat(xv).transpose();
  return x.tape->make(std::move(y), {x}, [x](Tape& tp, std::size_t self) {
    if (!tp.requires_grad(x)) return;
    as_mat(tp.grad_of(x.id)) += as_mat(tp.grad(self)).transpose();
  });
}

Var gather_rows(Var x, std::vector<std::size_t> index) {
  const auto& xv = x.value();
  const std::size_t C = xv.cols(), R = xv.rows();
  Tensor y(Shape{index.size(), C});
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= R) throw ShapeError("gather_rows: index out of range");
    std::copy_n(xv.data.begin() + index[i] * C, C, y.data.begin() + i * C);
  }
  return x.tape->make(std::move(y), {x}, [x, index = std::move(index), C](Tape& tp, std::size_t self) {
    if (!tp.requires_grad(x)) return;
    const auto& g = tp.grad(self);
    auto& gx = tp.grad_of(x.id);
    for (std::size_t i = 0; i < index.size(); ++i)
      for (std::size_t c = 0; c < C; ++c) gx[index[i] * C + c] += g[i * C + c];
  });
}

Var repeat_rows(Var x, std::size_t repeat) {
  const auto& xv = x.value();
  const std::size_t C = xv.cols(), R = xv.rows();
  Tensor y(Shape{R * repeat, C});
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t k = 0; k < repeat; ++k)
      std::copy_n(xv.data.begin() + r * C, C, y.data.begin() + (r * repeat + k) * C);
  return x.tape->make(std::move(y), {x}, [x, repeat, C](Tape& tp, std::size_t self) {
    if (!tp.requires_grad(x)) return;
    const auto& g = tp.grad(self);
    auto& gx = tp.grad_of(x.id);
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t c = 0; c < C; ++c) gx[(i / repeat) * C + c] += g[i * C + c];
  });
}

Var shift_rows(Var x, std::size_t seq_len, long offset) {
  const auto& xv = x.value();
  const std::size_t C = xv.cols(), R = xv.rows();
  if (seq_len == 0 || R % seq_len) throw ShapeError("shift_rows: rows not divisible by seq_len");
  auto source = [seq_len, offset](std::size_t r) -> long {
    const long pos = static_cast<long>(r % seq_len) + offset;
    if (pos < 0 || pos >= static_cast<long>(seq_len)) return -1;
    return static_cast<long>(r) + offset;
  };
  Tensor y(xv.shape);
  for (std::size_t r = 0; r < R; ++r) {
    const long s = source(r);
    if (s >= 0) std::copy_n(xv.data.begin() + s * C, C, y.data.begin() + r * C);
  }
  return x.tape->make(std::move(y), {x}, [x, source, C](Tape& tp, std::size_t self) {
    if (!tp.requires_grad(x)) return;
    const auto& g = tp.grad(self);
    auto& gx = tp.grad_of(x.id);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      const long s = source(r);
      if (s < 0) continue;
      for (std::size_t c = 0; c < C; ++c) gx[s * C + c] += g[r * C + c];
    }
  });
}

Var mean_pool_groups(Var x, std::size_t group) {
  const auto& xv = x.value();
  const std::size_t C = xv.cols(), R = xv.rows();
  if (group == 0 || R % group) throw ShapeError("mean_pool_groups: rows not divisible by group");
  Tensor y(Shape{R / group, C});
  const double inv = 1.0 / static_cast<double>(group);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < C; ++c) y[(r / group) * C + c] += inv * xv[r * C + c];
  return x.tape->make(std::move(y), {x}, [x, group, C, inv](Tape& tp, std::size_t self) {
    if (!tp.requires_grad(x)) return;
    const auto& g = tp.grad(self);
    auto& gx = tp.grad_of(x.id);
    for (std::size_t r = 0; r < gx.rows(); ++r)
      for (std::size_t c = 0; c < C; ++c) gx[r * C + c] += inv * g[(r / group) * C + c];
  });
}

Var concat_cols(const std::vector<Var>& xs) {
  if (xs.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t R = xs[0].rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& v : xs) {
    if (v.rows() != R) throw ShapeError("concat_cols: row count mismatch");
    widths.push_back(v.cols());
    total += v.cols();
  }
  Tensor y(Shape{R, total});
  std::size_t off = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto& xv = xs[i].value();
    for (std::size_t r = 0; r < R; ++r)
      std::copy_n(xv.data.begin() + r * widths[i], widths[i], y.data.begin() + r * total + off);
    off += widths[i];
  }
  return xs[0].tape->make(std::move(y), xs, [xs, widths, total](Tape& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    std::size_t off = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (tp.requires_grad(xs[i])) {
        auto& gx = tp.grad_of(xs[i].id);
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < widths[i]; ++c) gx[r * widths[i] + c] += g[r * total + off + c];
      }
      off += widths[i];
    }
  });
}

Var slice_cols(Var x, std::size_t start, std::size_t count) {
  const auto& xv = x.value();
  const std::size_t C = xv.cols(), R = xv.rows();
  if (start + count > C) throw ShapeError("slice_cols: range exceeds columns");
  Tensor y(Shape{R, count});
  for (std::size_t r = 0; r < R; ++r) std::copy_n(xv.data.begin() + r * C + start, count, y.data.begin() + r * count);
  return x.tape->make(std::move(y), {x}, [x, start, count, C](Tape& tp, std::size_t self) {
    if (!tp.requires_grad(x)) return;
    const auto& g = tp.grad(self);
    auto& gx = tp.grad_of(x.id);
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < count; ++c) gx[r * C + start + c] += g[r * count + c];
  });
}

Var masked_fill(Var x, const std::vector<std::uint8_t>& mask, double value) {
  const auto& xv = x.value();
  if (mask.size() != xv.size()) throw ShapeError("masked_fill: mask size mismatch");
  Tensor y = xv;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (mask[i]) y[i] = value;
  return x.tape->make(std::move(y), {x}, [x, mask](Tape& tp, std::size_t self) {
    if (!tp.requires_grad(x)) return;
    const auto& g = tp.grad(self);
    auto& gx = tp.grad_of(x.id);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!mask[i]) gx[i] += g[i];
  });
}

Var masked_mse(Var pred, const Tensor& target, const std::vector<std::uint8_t>& mask) {
  const auto& pv = pred.value();
  if (target.size() != pv.size() || mask.size() != pv.size()) throw ShapeError("masked_mse: size mismatch");
  std::size_t n = 0;
  double s = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i)
    if (mask[i]) {
      const double d = pv[i] - target[i];
      s += d * d;
      ++n;
    }
  if (n == 0) throw ValueError("masked_mse: mask selects no entries");
  const double inv = 1.0 / static_cast<double>(n);
  return pred.tape->make(Tensor::scalar(s * inv), {pred}, [pred, target, mask, inv](Tape& tp, std::size_t self) {
    if (!tp.requires_grad(pred)) return;
    const double g = tp.grad(self)[0];
    const auto& pv = tp.value(pred.id);
    auto& gp = tp.grad_of(pred.id);
    for (std::size_t i = 0; i < pv.size(); ++i)
      if (mask[i]) gp[i] += 2.0 * inv * g * (pv[i] - target[i]);
  });
}

Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value().data) s += v;
  return x.tape->make(Tensor::scalar(s), {x}, [x](Tape& tp, std::size_t self) {
    if (!tp.requires_grad(x)) return;
    const double g = tp.grad(self)[0];
    for (auto& v : tp.grad_of(x.id).data) v += g;
  });
}

Var mean(Var x) { return scale(sum(x), 1.0 / static_cast<double>(x.value().size())); }

namespace {
void softmax_inplace(RowMat& A) {
  A = (A.colwise() - A.rowwise().maxCoeff()).array().exp().matrix();
  A.array().colwise() /= A.rowwise().sum().array();
}
}  // namespace

Var attention(Var qkv, std::size_t seq_len, std::size_t n_heads) {
  const auto& xv = qkv.value();
  const std::size_t N = xv.rows(), C3 = xv.cols();
  if (C3 % 3 || n_heads == 0 || (C3 / 3) % n_heads)
    throw ShapeError("attention: width " + std::to_string(C3) + " not divisible into q/k/v and heads");
  if (seq_len == 0 || N % seq_len) throw ShapeError("attention: rows not divisible by seq_len");
  const std::size_t d = C3 / 3, dh = d / n_heads, n_seq = N / seq_len;
  const double sc = 1.0 / std::sqrt(static_cast<double>(dh));
  Tensor y(Shape{N, d});
  auto X = as_mat(xv);
  auto Y = as_mat(y);
  RowMat A;
  for (std::size_t s = 0; s < n_seq; ++s) {
    const auto r0 = static_cast<Eigen::Index>(s * seq_len);
    const auto S = static_cast<Eigen::Index>(seq_len);
    for (std::size_t h = 0; h < n_heads; ++h) {
      const auto c = static_cast<Eigen::Index>(h * dh);
      const auto w = static_cast<Eigen::Index>(dh);
      auto Q = X.block(r0, c, S, w);
      auto K = X.block(r0, d + c, S, w);
      auto V = X.block(r0, 2 * d + c, S, w);
      A.noalias() = sc * Q * K.transpose();
      softmax_inplace(A);
      Y.block(r0, c, S, w).noalias() = A * V;
    }
  }
  return qkv.tape->make(std::move(y), {qkv}, [qkv, seq_len, n_heads, d, dh, n_seq, sc](Tape& tp, std::size_t self) {
    if (!tp.requires_grad(qkv)) return;
    auto X = as_mat(tp.value(qkv.id));
    auto G = as_mat(tp.grad(self));
    auto GX = as_mat(tp.grad_of(qkv.id));
    RowMat A, dA, dS;
    for (std::size_t s = 0; s < n_seq; ++s) {
      const auto r0 = static_cast<Eigen::Index>(s * seq_len);
      const auto S = static_cast<Eigen::Index>(seq_len);
      for (std::size_t h = 0; h < n_heads; ++h) {
        const auto c = static_cast<Eigen::Index>(h * dh);
        const auto w = static_cast<Eigen::Index>(dh);
        auto Q = X.block(r0, c, S, w);
        auto K = X.block(r0, d + c, S, w);
        auto V = X.block(r0, 2 * d + c, S, w);
        A.noalias() = sc * Q * K.transpose();
        softmax_inplace(A);
        auto dO = G.block(r0, c, S, w);
        GX.block(r0, 2 * d + c, S, w).noalias() += A.transpose() * dO;
        dA.noalias() = dO * V.transpose();
        dS = A.cwiseProduct(dA);
        const Eigen::VectorXd rs = dS.rowwise().sum();
        dS -= A.cwiseProduct(rs.replicate(1, S));
        GX.block(r0, c, S, w).noalias() += sc * dS * K;
        GX.block(r0, d + c, S, w).noalias() += sc * dS.transpose() * Q;
      }
    }
  });
}

Var temporal_conv(Var x, Var w, Var b, std::size_t seq_len) {
  auto cols = concat_cols({shift_rows(x, seq_len, -1), x, shift_rows(x, seq_len, 1)});
  return linear(cols, w, b);
}

}  // namespace lscd::ad
