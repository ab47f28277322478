#pragma once

#include <cstdint>
#include <vector>

#include "lscd/autodiff/tape.hpp"

namespace lscd::ad {

// Elementwise. `add` also accepts b of shape [cols], broadcast over rows.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var square(Var a);

Var relu(Var x);
Var gelu(Var x);  // exact (erf) form
Var sigmoid(Var x);
Var tanh(Var x);
Var silu(Var x);

/// [n, m] x [m, p].
Var matmul(Var a, Var b);
/// x [n, in] * w [in, out] + b [out].
Var linear(Var x, Var w, Var b);

Var softmax_rows(Var x);
Var layernorm_rows(Var x, Var gamma, Var beta, double eps = 1e-5);

Var reshape(Var x, Shape shape);
Var transpose2d(Var x);

/// out[i] = x[index[i]]; gradients scatter-add back.
Var gather_rows(Var x, std::vector<std::size_t> index);
/// Row i of x becomes rows [i * repeat, (i + 1) * repeat) of the result.
Var repeat_rows(Var x, std::size_t repeat);
/// Rows are split into consecutive sequences of `seq_len`; row r takes row
/// r + offset of the same sequence, or zeros when that falls outside.
Var shift_rows(Var x, std::size_t seq_len, long offset);
/// [G * group, C] -> [G, C] by averaging consecutive rows.
Var mean_pool_groups(Var x, std::size_t group);

Var concat_cols(const std::vector<Var>& xs);
Var slice_cols(Var x, std::size_t start, std::size_t count);

/// Entries where mask != 0 are replaced by `value` and receive no gradient.
Var masked_fill(Var x, const std::vector<std::uint8_t>& mask, double value);
/// Mean of (pred - target)^2 over entries where mask != 0.
Var masked_mse(Var pred, const Tensor& target, const std::vector<std::uint8_t>& mask);

Var sum(Var x);
Var mean(Var x);

/// Scaled dot-product attention over consecutive sequences of `seq_len` rows.
/// `qkv` is [N, 3d] holding the query, key and value projections side by
/// side; heads split d evenly. Returns [N, d].
Var attention(Var qkv, std::size_t seq_len, std::size_t n_heads);

/// Kernel-3 convolution along each sequence with zero "same" padding.
/// w is [3 * C_in, C_out] (previous, current, next taps stacked by rows).
Var temporal_conv(Var x, Var w, Var b, std::size_t seq_len);

}  // namespace lscd::ad
