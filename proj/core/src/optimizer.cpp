#include "mutadetect/optimizer.hpp"

#include "mutadetect/error.hpp"

namespace mutadetect {

void sgd_step(std::vector<Tensor>& params, double lr) {
  for (Tensor& p : params) {
    if (!p.has_grad()) {
      throw ContractError("sgd_step: parameter of shape " + p.shape_str() +
                          " has no gradient");
    }
  }
  for (Tensor& p : params) {
    const auto& g = p.grad_view();
    double* v = p.data();
    for (std::size_t i = 0; i < p.size(); ++i) v[i] -= lr * g[i];
    p.zero_grad();
  }
}

}  // namespace mutadetect
