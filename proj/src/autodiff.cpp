#include "pidcnn/autodiff.hpp"

#include <algorithm>

namespace pidcnn {

template <typename Scalar>
Parameter<Scalar>& ParameterStore<Scalar>::add(std::string name, BasicTensor<Scalar> value) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  index_.emplace(name, entries_.size());
  Parameter<Scalar> p;
  p.name = std::move(name);
  p.first_moment = BasicTensor<Scalar>::zeros(value.shape());
  p.second_moment = BasicTensor<Scalar>::zeros(value.shape());
  p.value = std::move(value);
  entries_.push_back(std::move(p));
  return entries_.back();
}

template <typename Scalar>
Parameter<Scalar>& ParameterStore<Scalar>::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named " + name);
  return entries_[it->second];
}

template <typename Scalar>
const Parameter<Scalar>& ParameterStore<Scalar>::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named " + name);
  return entries_[it->second];
}

template <typename Scalar>
std::vector<std::string> ParameterStore<Scalar>::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& p : entries_) out.push_back(p.name);
  return out;
}

template <typename Scalar>
void ParameterStore<Scalar>::clear_gradients() {
  for (auto& p : entries_) p.grad.reset();
}

template <typename Scalar>
TracedValue<Scalar> Tape<Scalar>::constant(BasicTensor<Scalar> value) {
  nodes_.push_back(Node{std::move(value), std::nullopt, {}, nullptr, false});
  return Value(this, nodes_.size() - 1);
}

template <typename Scalar>
TracedValue<Scalar> Tape<Scalar>::leaf(BasicTensor<Scalar> value) {
  nodes_.push_back(Node{std::move(value), std::nullopt, {}, nullptr, true});
  return Value(this, nodes_.size() - 1);
}

template <typename Scalar>
TracedValue<Scalar> Tape<Scalar>::parameter(Parameter<Scalar>& param) {
  if (auto it = bound_.find(&param); it != bound_.end()) return Value(this, it->second);
  nodes_.push_back(Node{param.value, std::nullopt, {}, &param, true});
  bound_.emplace(&param, nodes_.size() - 1);
  return Value(this, nodes_.size() - 1);
}

template <typename Scalar>
TracedValue<Scalar> Tape<Scalar>::record(BasicTensor<Scalar> value, std::vector<std::size_t> inputs,
                                         BackwardFn backward) {
  const bool needs = std::any_of(inputs.begin(), inputs.end(), [&](std::size_t id) { return nodes_[id].requires_grad; });
  nodes_.push_back(Node{std::move(value), std::nullopt, needs ? std::move(backward) : BackwardFn{}, nullptr, needs});
  return Value(this, nodes_.size() - 1);
}

template <typename Scalar>
const BasicTensor<Scalar>* Tape<Scalar>::grad_if(std::size_t id) const {
  const auto& g = nodes_[id].grad;
  return g ? &*g : nullptr;
}

template <typename Scalar>
BasicTensor<Scalar>& Tape<Scalar>::grad(std::size_t id) {
  auto& node = nodes_[id];
  if (!node.grad) node.grad = BasicTensor<Scalar>::zeros(node.value.shape());
  return *node.grad;
}

template <typename Scalar>
void Tape<Scalar>::backward(const Value& loss) {
  if (loss.tape_ != this) throw std::invalid_argument("backward: loss belongs to a different tape");
  if (value(loss.id()).size() != 1) {
    throw ShapeError("backward: loss must be scalar, got shape " + to_string(value(loss.id()).shape()));
  }
  for (auto& node : nodes_) node.grad.reset();
  grad(loss.id()).fill(Scalar{1});
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    auto& node = nodes_[i];
    if (node.grad && node.backward) node.backward(*this, i);
  }
  for (auto& node : nodes_) {
    if (node.param) node.param->grad = node.grad ? *node.grad : BasicTensor<Scalar>::zeros(node.value.shape());
  }
}

template class ParameterStore<float>;
template class ParameterStore<double>;
template class Tape<float>;
template class Tape<double>;

}  // namespace pidcnn
