#include "mutadetect/grad_check.hpp"

#include <cmath>
#include <vector>

#include "mutadetect/error.hpp"

namespace mutadetect {

namespace {
double eval_at(const TensorFn& f, const Tensor& point, std::size_t coord, double delta) {
  std::vector<double> vals(point.data(), point.data() + point.size());
  vals[coord] += delta;
  Tensor x = Tensor::from(point.shape(), std::move(vals));
  Tape tape;
  Tensor y = f(tape, x);
  if (y.size() != 1) throw ContractError("grad_check requires a scalar-valued function");
  return y.item();
}
}  // namespace

double grad_check(const TensorFn& f, const Tensor& point, double eps) {
  if (eps == 0.0) {
    throw ContractError("grad_check eps=0 would divide by zero");
  }
  Tensor x = Tensor::from(point.shape(),
                          std::vector<double>(point.data(), point.data() + point.size()),
                          /*requires_grad=*/true);
  Tape tape;
  Tensor y = f(tape, x);
  if (y.size() != 1) throw ContractError("grad_check requires a scalar-valued function");
  tape.backward(y);
  const std::vector<double> analytic = x.grad_view();

  double worst = 0.0;
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double fp = eval_at(f, point, i, eps);
    const double fm = eval_at(f, point, i, -eps);
    const double fd = (fp - fm) / (2.0 * eps);
    const double denom = std::max(1.0, std::abs(analytic[i]));
    worst = std::max(worst, std::abs(analytic[i] - fd) / denom);
  }
  return worst;
}

}  // namespace mutadetect
