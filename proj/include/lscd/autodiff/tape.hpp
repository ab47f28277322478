#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lscd/autodiff/tensor.hpp"
#include "lscd/core/random.hpp"

namespace lscd::ad {

/// Trainable tensor with its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  std::string init;  // initialization tag, kept in checkpoints
};

/// Named parameters in insertion order. Pointers stay valid for the store's lifetime.
class ParameterStore {
 public:
  Parameter& add(const std::string& name, Tensor value, std::string init = "");
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::vector<Parameter*>& all() { return order_; }
  const std::vector<Parameter*>& all() const { return order_; }
  std::size_t count() const;  // total scalars

  void zero_grad();
  bool all_finite() const;

 private:
  std::vector<std::unique_ptr<Parameter>> owned_;
  std::vector<Parameter*> order_;
};

/// Truncated normal (resampled beyond two standard deviations).
Tensor truncated_normal(Shape shape, double std, Rng& rng);

class Tape;

/// Handle to a node on a tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape; }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

/// Records a computation in creation order; backward() replays it in reverse.
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  /// With grad disabled, parameters enter as constants and no backward
  /// closures are kept (inference).
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  Var constant(Tensor value);
  Var parameter(Parameter& p);
  /// Generic node: `inputs` decide whether the result requires a gradient.
  Var make(Tensor value, std::initializer_list<Var> inputs, Backward fn);
  Var make(Tensor value, const std::vector<Var>& inputs, Backward fn);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& grad(std::size_t id) const { return nodes_[id].grad; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  bool requires_grad(const Var& v) const { return nodes_[v.id].requires_grad; }

  /// Gradient buffer of an input node, zero-allocated on first use.
  Tensor& grad_of(std::size_t id);

  /// Seeds d(loss)/d(loss) = 1 for a single-element node and propagates.
  /// Parameter gradients are accumulated into Parameter::grad. Intermediate
  /// gradients are freed once propagated unless `retain` is set.
  void backward(const Var& loss, bool retain = false);

  std::size_t size() const { return nodes_.size(); }

  /// Drops every node created after the first `n`. Vars that refer to them
  /// become invalid.
  void truncate(std::size_t n);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    Backward backward;
    Parameter* param = nullptr;
  };
  std::vector<Node> nodes_;
  bool grad_enabled_ = true;
};

}  // namespace lscd::ad
