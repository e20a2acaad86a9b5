#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "pidcnn/errors.hpp"

namespace pidcnn {

/// Extents of a dense tensor, outermost first. At most five axes
/// (batch, channel, time, height, width); every extent is at least 1.
using Shape = std::vector<std::size_t>;

inline constexpr std::size_t kMaxRank = 5;

std::size_t element_count(const Shape& shape);
std::string to_string(const Shape& shape);
void validate_shape(const Shape& shape);

/// Dense row-major array. Value semantics; copying copies the data.
///
/// `float` is the training precision. `double` exists for gradient checks.
template <typename Scalar>
class BasicTensor {
 public:
  using value_type = Scalar;

  BasicTensor() : shape_{1}, data_(1, Scalar{0}) {}
  explicit BasicTensor(Shape shape, Scalar fill = Scalar{0});
  BasicTensor(Shape shape, std::vector<Scalar> data);

  static BasicTensor zeros(Shape shape) { return BasicTensor(std::move(shape)); }
  static BasicTensor full(Shape shape, Scalar value) { return BasicTensor(std::move(shape), value); }
  static BasicTensor scalar(Scalar value) { return BasicTensor(Shape{1}, value); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<Scalar> data() noexcept { return data_; }
  std::span<const Scalar> data() const noexcept { return data_; }
  const std::vector<Scalar>& values() const noexcept { return data_; }

  Scalar& operator[](std::size_t i) { return data_[i]; }
  const Scalar& operator[](std::size_t i) const { return data_[i]; }

  /// Element access by full multi-index; rank must match.
  Scalar& at(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }
  const Scalar& at(std::initializer_list<std::size_t> index) const { return data_[offset(index)]; }

  void fill(Scalar value);

  /// Same data, new extents. Element count must be preserved.
  BasicTensor reshaped(Shape shape) const;

  template <typename Other>
  BasicTensor<Other> cast() const {
    std::vector<Other> out(data_.begin(), data_.end());
    return BasicTensor<Other>(shape_, std::move(out));
  }

  bool operator==(const BasicTensor&) const = default;

 private:
  std::size_t offset(std::initializer_list<std::size_t> index) const;

  Shape shape_;
  std::vector<Scalar> data_;
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

extern template class BasicTensor<float>;
extern template class BasicTensor<double>;

/// Throws ShapeError naming `what` unless the shapes are identical.
void require_same_shape(const Shape& a, const Shape& b, const char* what);

}  // namespace pidcnn
