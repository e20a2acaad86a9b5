#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pidcnn/tensor.hpp"

namespace pidcnn {

/// A trainable tensor with its gradient slot and Adam moments.
template <typename Scalar>
struct Parameter {
  std::string name;
  BasicTensor<Scalar> value;
  std::optional<BasicTensor<Scalar>> grad;
  BasicTensor<Scalar> first_moment;
  BasicTensor<Scalar> second_moment;
  std::uint64_t step = 0;
};

/// Insertion-ordered name -> Parameter map. Element addresses are stable
/// across insertions, so a tape may hold pointers into the store.
template <typename Scalar>
class ParameterStore {
 public:
  Parameter<Scalar>& add(std::string name, BasicTensor<Scalar> value);

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  Parameter<Scalar>& at(const std::string& name);
  const Parameter<Scalar>& at(const std::string& name) const;

  std::size_t size() const noexcept { return entries_.size(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  std::vector<std::string> names() const;
  void clear_gradients();

  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = default;
  ParameterStore& operator=(const ParameterStore&) = default;
  ParameterStore(ParameterStore&&) noexcept = default;
  ParameterStore& operator=(ParameterStore&&) noexcept = default;

 private:
  std::deque<Parameter<Scalar>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

template <typename Scalar>
class Tape;

/// Handle to one node of a Tape. Cheap to copy; only valid while its tape lives.
template <typename Scalar>
class TracedValue {
 public:
  TracedValue() = default;

  const BasicTensor<Scalar>& value() const;
  const Shape& shape() const { return value().shape(); }
  /// Gradient after Tape::backward, or nullptr if no gradient reached this node.
  const BasicTensor<Scalar>* grad() const;

  Tape<Scalar>& tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape<Scalar>;
  TracedValue(Tape<Scalar>* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape<Scalar>* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Append-only record of one forward pass (define-by-run). Nodes only
/// reference earlier nodes, so a reverse sweep in index order is a valid
/// topological order. Not thread-safe; one tape per thread.
template <typename Scalar>
class Tape {
 public:
  using Value = TracedValue<Scalar>;
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Input that never receives a gradient.
  Value constant(BasicTensor<Scalar> value);
  /// Input that receives a gradient (used by gradient checks).
  Value leaf(BasicTensor<Scalar> value);
  /// Binds a store parameter. Binding the same parameter twice returns the same node.
  Value parameter(Parameter<Scalar>& param);

  /// Appends an operation result. The backward rule is dropped when no input needs a gradient.
  Value record(BasicTensor<Scalar> value, std::vector<std::size_t> inputs, BackwardFn backward);

  const BasicTensor<Scalar>& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  bool has_grad(std::size_t id) const { return nodes_[id].grad.has_value(); }
  const BasicTensor<Scalar>* grad_if(std::size_t id) const;
  /// Gradient accumulator for a node, zero-initialised on first use.
  BasicTensor<Scalar>& grad(std::size_t id);

  /// Reverse sweep from a scalar loss. Afterwards every parameter bound to
  /// this tape holds its gradient (zero when the loss does not depend on it).
  void backward(const Value& loss);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    BasicTensor<Scalar> value;
    std::optional<BasicTensor<Scalar>> grad;
    BackwardFn backward;
    Parameter<Scalar>* param = nullptr;
    bool requires_grad = false;
  };

  std::deque<Node> nodes_;  // push_back keeps references to existing nodes valid
  std::unordered_map<const Parameter<Scalar>*, std::size_t> bound_;
};

template <typename Scalar>
const BasicTensor<Scalar>& TracedValue<Scalar>::value() const {
  return tape_->value(id_);
}

template <typename Scalar>
const BasicTensor<Scalar>* TracedValue<Scalar>::grad() const {
  return tape_->grad_if(id_);
}

using Traced = TracedValue<float>;
using Traced64 = TracedValue<double>;

extern template class ParameterStore<float>;
extern template class ParameterStore<double>;
extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace pidcnn
