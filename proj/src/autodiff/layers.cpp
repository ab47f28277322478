#include "lscd/autodiff/layers.hpp"

#include <cmath>

namespace lscd::ad {

Linear Linear::create(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out, Rng& rng,
                      double std) {
  Linear l;
  l.w = &store.add(name + ".w", truncated_normal({in, out}, std, rng), "trunc_normal");
  l.b = &store.add(name + ".b", Tensor(Shape{out}), "zeros");
  return l;
}

Var Linear::operator()(Tape& tape, Var x) const { return linear(x, tape.parameter(*w), tape.parameter(*b)); }

LayerNorm LayerNorm::create(ParameterStore& store, const std::string& name, std::size_t dim) {
  LayerNorm n;
  n.gamma = &store.add(name + ".gamma", Tensor(Shape{dim}, 1.0), "ones");
  n.beta = &store.add(name + ".beta", Tensor(Shape{dim}), "zeros");
  return n;
}

Var LayerNorm::operator()(Tape& tape, Var x) const {
  return layernorm_rows(x, tape.parameter(*gamma), tape.parameter(*beta));
}

TransformerLayer TransformerLayer::create(ParameterStore& store, const std::string& name, std::size_t d_model,
                                          std::size_t n_heads, std::size_t d_ff, Rng& rng) {
  if (n_heads == 0 || d_model % n_heads)
    throw ValueError("TransformerLayer: d_model " + std::to_string(d_model) + " not divisible by heads");
  TransformerLayer t;
  t.n_heads = n_heads;
  t.qkv = Linear::create(store, name + ".qkv", d_model, 3 * d_model, rng);
  t.proj = Linear::create(store, name + ".proj", d_model, d_model, rng);
  t.ff1 = Linear::create(store, name + ".ff1", d_model, d_ff, rng);
  t.ff2 = Linear::create(store, name + ".ff2", d_ff, d_model, rng);
  t.norm1 = LayerNorm::create(store, name + ".norm1", d_model);
  t.norm2 = LayerNorm::create(store, name + ".norm2", d_model);
  return t;
}

Var TransformerLayer::operator()(Tape& tape, Var x, std::size_t seq_len) const {
  auto a = proj(tape, attention(qkv(tape, x), seq_len, n_heads));
  auto h = norm1(tape, add(x, a));
  auto f = ff2(tape, gelu(ff1(tape, h)));
  return norm2(tape, add(h, f));
}

Tensor sinusoidal_embedding(const std::vector<double>& positions, std::size_t dim, double max_period) {
  if (dim % 2) throw ValueError("sinusoidal_embedding: dim must be even");
  const std::size_t half = dim / 2;
  Tensor out(Shape{positions.size(), dim});
  for (std::size_t i = 0; i < positions.size(); ++i)
    for (std::size_t j = 0; j < half; ++j) {
      const double freq = std::pow(max_period, -static_cast<double>(j) / static_cast<double>(half));
      out.at(i, j) = std::sin(positions[i] * freq);
      out.at(i, half + j) = std::cos(positions[i] * freq);
    }
  return out;
}

}  // namespace lscd::ad
