#include "scnn/tensor.hpp"

#include <sstream>

namespace scnn {

namespace {

std::size_t checked_element_count(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("tensor shape has a zero dimension: " + shape_to_string(shape));
    n *= d;
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
  data_.assign(checked_element_count(shape_), 0.0);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (checked_element_count(shape_) != data_.size()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_to_string(shape_));
  }
}

Tensor Tensor::vector(std::vector<double> values) {
  std::vector<std::size_t> shape{values.size()};
  return Tensor(std::move(shape), std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

void Tensor::ensure_grad() {
  if (grad_.empty()) grad_.assign(data_.size(), 0.0);
}

void Tensor::zero_grad() {
  if (!grad_.empty()) grad_.assign(data_.size(), 0.0);
}

void Tensor::fill(double v) { data_.assign(data_.size(), v); }

Tensor Tensor::reshaped(std::vector<std::size_t> new_shape) const {
  if (checked_element_count(new_shape) != data_.size()) {
    throw ShapeError("reshape from " + shape_str() + " to " + shape_to_string(new_shape) +
                     " changes element count");
  }
  return Tensor(std::move(new_shape), data_);
}

std::string Tensor::shape_str() const { return shape_to_string(shape_); }

void require_rank(const Tensor& t, std::size_t rank, const char* who) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(who) + ": expected rank " + std::to_string(rank) +
                     ", got shape " + t.shape_str());
  }
}

std::string shape_to_string(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

}  // namespace scnn
