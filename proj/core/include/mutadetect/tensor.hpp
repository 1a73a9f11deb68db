#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace mutadetect {

// Dense row-major tensor. Rank is 1 or 2; the model treats rank-1 as a row
// vector where a matrix is expected. Values are double throughout: the
// gradient checks in the test suite compare analytic gradients against
// central finite differences at 1e-5 relative tolerance, which single
// precision cannot reach.
struct TensorData {
  std::vector<std::size_t> shape;
  std::vector<double> values;
  std::vector<double> grad;  // same length as values once touched by backward
  bool requires_grad = false;
};

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false);
  static Tensor from(std::vector<std::size_t> shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double v);
  // 1xN row vector.
  static Tensor row(std::vector<double> values, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(d_); }
  const std::vector<std::size_t>& shape() const { return d_->shape; }
  std::size_t size() const { return d_->values.size(); }
  std::size_t rank() const { return d_->shape.size(); }

  // Rank-1 tensors behave as 1xN.
  std::size_t rows() const { return rank() == 1 ? 1 : d_->shape[0]; }
  std::size_t cols() const { return rank() == 1 ? d_->shape[0] : d_->shape[1]; }

  double* data() { return d_->values.data(); }
  const double* data() const { return d_->values.data(); }
  double& at(std::size_t i) { return d_->values[i]; }
  double at(std::size_t i) const { return d_->values[i]; }
  double& at(std::size_t r, std::size_t c) { return d_->values[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return d_->values[r * cols() + c]; }
  double item() const;  // value of a one-element tensor

  bool requires_grad() const { return d_->requires_grad; }
  // Allocates the gradient buffer (zeroed) if absent. Mutates the shared
  // storage, not this handle, so backward closures can call it on tensors
  // captured by value.
  std::vector<double>& grad() const;
  const std::vector<double>& grad_view() const { return d_->grad; }
  bool has_grad() const { return !d_->grad.empty(); }
  void zero_grad();

  std::shared_ptr<TensorData> storage() const { return d_; }
  bool same_storage(const Tensor& other) const { return d_ == other.d_; }

  std::string shape_str() const;

 private:
  explicit Tensor(std::shared_ptr<TensorData> d) : d_(std::move(d)) {}
  std::shared_ptr<TensorData> d_;
};

// "2x3" style formatting for error messages.
std::string shape_to_string(const std::vector<std::size_t>& shape);

}  // namespace mutadetect
