#include "mutadetect/tensor.hpp"

#include <numeric>
#include <sstream>

#include "mutadetect/error.hpp"

namespace mutadetect {

namespace {
std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t s : shape) {
    if (s == 0) throw ContractError("tensor shape has a zero dimension");
    n *= s;
  }
  return n;
}
}  // namespace

Tensor Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
  auto d = std::make_shared<TensorData>();
  std::size_t n = shape_product(shape);
  d->shape = std::move(shape);
  d->values.assign(n, 0.0);
  d->requires_grad = requires_grad;
  if (requires_grad) d->grad.assign(n, 0.0);
  return Tensor(std::move(d));
}

Tensor Tensor::from(std::vector<std::size_t> shape, std::vector<double> values,
                    bool requires_grad) {
  std::size_t n = shape_product(shape);
  if (values.size() != n) {
    throw ContractError("tensor value count " + std::to_string(values.size()) +
                        " does not match shape " + shape_to_string(shape));
  }
  auto d = std::make_shared<TensorData>();
  d->shape = std::move(shape);
  d->values = std::move(values);
  d->requires_grad = requires_grad;
  if (requires_grad) d->grad.assign(n, 0.0);
  return Tensor(std::move(d));
}

Tensor Tensor::scalar(double v) { return from({1, 1}, {v}); }

Tensor Tensor::row(std::vector<double> values, bool requires_grad) {
  std::size_t n = values.size();
  return from({1, n}, std::move(values), requires_grad);
}

double Tensor::item() const {
  if (size() != 1) {
    throw ContractError("item() on tensor of shape " + shape_str());
  }
  return d_->values[0];
}

std::vector<double>& Tensor::grad() const {
  if (d_->grad.empty()) d_->grad.assign(d_->values.size(), 0.0);
  return d_->grad;
}

void Tensor::zero_grad() {
  if (!d_->grad.empty()) d_->grad.assign(d_->values.size(), 0.0);
}

std::string Tensor::shape_str() const { return shape_to_string(d_->shape); }

std::string shape_to_string(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  return os.str();
}

}  // namespace mutadetect
