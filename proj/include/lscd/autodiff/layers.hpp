#pragma once

#include <string>

#include "lscd/autodiff/ops.hpp"

namespace lscd::ad {

struct Linear {
  Parameter* w = nullptr;  // [in, out]
  Parameter* b = nullptr;  // [out]

  static Linear create(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out, Rng& rng,
                       double std = 0.02);
  Var operator()(Tape& tape, Var x) const;
};

struct LayerNorm {
  Parameter* gamma = nullptr;
  Parameter* beta = nullptr;

  static LayerNorm create(ParameterStore& store, const std::string& name, std::size_t dim);
  Var operator()(Tape& tape, Var x) const;
};

/// Post-norm transformer layer: h = LN(x + MHA(x)), out = LN(h + FFN(h)).
struct TransformerLayer {
  std::size_t n_heads = 1;
  Linear qkv, proj, ff1, ff2;
  LayerNorm norm1, norm2;

  static TransformerLayer create(ParameterStore& store, const std::string& name, std::size_t d_model,
                                 std::size_t n_heads, std::size_t d_ff, Rng& rng);
  /// x is [N, d_model] made of consecutive sequences of `seq_len` tokens.
  Var operator()(Tape& tape, Var x, std::size_t seq_len) const;
};

/// Sinusoidal embedding of scalar positions: [n] -> [n, dim] (sin half, cos half).
Tensor sinusoidal_embedding(const std::vector<double>& positions, std::size_t dim, double max_period = 10000.0);

}  // namespace lscd::ad
