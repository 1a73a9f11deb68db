#pragma once

#include <vector>

#include "mutadetect/tensor.hpp"

namespace mutadetect {

// Plain gradient descent: p <- p - lr * grad(p), then grads are zeroed.
// Every tensor must carry a populated gradient buffer.
void sgd_step(std::vector<Tensor>& params, double lr);

}  // namespace mutadetect
