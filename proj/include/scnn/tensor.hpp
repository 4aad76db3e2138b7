#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "scnn/error.hpp"

namespace scnn {

// Dense row-major 64-bit real tensor. The shape is fixed at construction;
// the gradient buffer is allocated lazily and always mirrors data length.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_[i]; }
  std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }

  bool has_grad() const { return !grad_.empty(); }
  // Allocates (zero-filled) the gradient buffer if absent.
  void ensure_grad();
  void zero_grad();
  double* grad() { return grad_.data(); }
  const double* grad() const { return grad_.data(); }
  std::span<double> grad_values() { return grad_; }
  std::span<const double> grad_values() const { return grad_; }

  void fill(double v);

  // New tensor with the same data and a different shape; element counts must
  // agree. Gradient buffers do not carry over.
  Tensor reshaped(std::vector<std::size_t> new_shape) const;

  std::string shape_str() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
  std::vector<double> grad_;
};

// Throws ShapeError mentioning `who` unless t has the wanted rank.
void require_rank(const Tensor& t, std::size_t rank, const char* who);

std::string shape_to_string(const std::vector<std::size_t>& shape);

}  // namespace scnn
