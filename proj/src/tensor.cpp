#include "pidcnn/tensor.hpp"

#include <algorithm>
#include <sstream>

namespace pidcnn {

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

void validate_shape(const Shape& shape) {
  if (shape.empty() || shape.size() > kMaxRank) {
    throw ShapeError("tensor rank must be in [1, 5], got shape " + to_string(shape));
  }
  if (std::any_of(shape.begin(), shape.end(), [](std::size_t e) { return e == 0; })) {
    throw ShapeError("tensor extents must be >= 1, got shape " + to_string(shape));
  }
}

void require_same_shape(const Shape& a, const Shape& b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": shape mismatch " + to_string(a) + " vs " + to_string(b));
  }
}

template <typename Scalar>
BasicTensor<Scalar>::BasicTensor(Shape shape, Scalar fill) : shape_(std::move(shape)) {
  validate_shape(shape_);
  data_.assign(element_count(shape_), fill);
}

template <typename Scalar>
BasicTensor<Scalar>::BasicTensor(Shape shape, std::vector<Scalar> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  validate_shape(shape_);
  if (element_count(shape_) != data_.size()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                     to_string(shape_));
  }
}

template <typename Scalar>
void BasicTensor<Scalar>::fill(Scalar value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename Scalar>
BasicTensor<Scalar> BasicTensor<Scalar>::reshaped(Shape shape) const {
  return BasicTensor(std::move(shape), data_);
}

template <typename Scalar>
std::size_t BasicTensor<Scalar>::offset(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw ShapeError("index rank " + std::to_string(index.size()) + " does not match shape " + to_string(shape_));
  }
  std::size_t off = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= shape_[axis]) throw ShapeError("index out of range for shape " + to_string(shape_));
    off = off * shape_[axis] + i;
    ++axis;
  }
  return off;
}

template class BasicTensor<float>;
template class BasicTensor<double>;

}  // namespace pidcnn
