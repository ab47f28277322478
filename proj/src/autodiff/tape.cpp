#include "lscd/autodiff/tape.hpp"

#include <algorithm>

namespace lscd::ad {

Parameter& ParameterStore::add(const std::string& name, Tensor value, std::string init) {
  if (contains(name)) throw ValueError("ParameterStore: duplicate parameter '" + name + "'");
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->grad = Tensor(value.shape);
  p->value = std::move(value);
  p->init = std::move(init);
  order_.push_back(p.get());
  owned_.push_back(std::move(p));
  return *order_.back();
}

Parameter& ParameterStore::get(const std::string& name) {
  for (auto* p : order_)
    if (p->name == name) return *p;
  throw ValueError("ParameterStore: unknown parameter '" + name + "'");
}

const Parameter& ParameterStore::get(const std::string& name) const {
  return const_cast<ParameterStore*>(this)->get(name);
}

bool ParameterStore::contains(const std::string& name) const {
  return std::any_of(order_.begin(), order_.end(), [&](auto* p) { return p->name == name; });
}

std::size_t ParameterStore::count() const {
  std::size_t n = 0;
  for (auto* p : order_) n += p->value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto* p : order_) std::fill(p->grad.data.begin(), p->grad.data.end(), 0.0);
}

bool ParameterStore::all_finite() const {
  return std::all_of(order_.begin(), order_.end(), [](auto* p) { return p->value.all_finite(); });
}

Tensor truncated_normal(Shape shape, double std, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.data) {
    double z;
    do {
      z = standard_normal(rng);
    } while (std::abs(z) > 2.0);
    v = std * z;
  }
  return t;
}

const Tensor& Var::value() const { return tape->value(id); }

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, false, nullptr, nullptr});
  return Var{this, nodes_.size() - 1};
}

Var Tape::parameter(Parameter& p) {
  if (!grad_enabled_) return constant(p.value);
  nodes_.push_back(Node{p.value, {}, true, nullptr, &p});
  return Var{this, nodes_.size() - 1};
}

Var Tape::make(Tensor value, std::initializer_list<Var> inputs, Backward fn) {
  return make(std::move(value), std::vector<Var>(inputs), std::move(fn));
}

Var Tape::make(Tensor value, const std::vector<Var>& inputs, Backward fn) {
  bool rg = false;
  for (const auto& v : inputs) {
    if (v.tape != this) throw ValueError("Tape: input belongs to another tape");
    rg = rg || nodes_[v.id].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), {}, rg, rg ? std::move(fn) : nullptr, nullptr});
  return Var{this, nodes_.size() - 1};
}

Tensor& Tape::grad_of(std::size_t id) {
  auto& n = nodes_[id];
  if (n.grad.size() != n.value.size()) n.grad = Tensor(n.value.shape);
  return n.grad;
}

void Tape::backward(const Var& loss, bool retain) {
  if (loss.tape != this) throw ValueError("Tape::backward: loss belongs to another tape");
  if (nodes_[loss.id].value.size() != 1) throw ShapeError("Tape::backward: loss must have one element");
  if (!nodes_[loss.id].requires_grad) return;
  grad_of(loss.id)[0] = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    auto& n = nodes_[i];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (n.param) {
      auto& g = n.param->grad.data;
      for (std::size_t j = 0; j < g.size(); ++j) g[j] += n.grad.data[j];
    } else if (n.backward) {
      n.backward(*this, i);
    }
    if (!retain) n.grad = Tensor();
  }
}

void Tape::truncate(std::size_t n) {
  if (n < nodes_.size()) nodes_.resize(n);
}

}  // namespace lscd::ad
