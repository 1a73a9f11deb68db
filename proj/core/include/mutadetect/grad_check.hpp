#pragma once

#include <functional>

#include "mutadetect/tape.hpp"
#include "mutadetect/tensor.hpp"

namespace mutadetect {

// Scalar-valued differentiable function of one tensor, built on a tape.
using TensorFn = std::function<Tensor(Tape&, const Tensor&)>;

// Max over coordinates of
//   |analytic - central_difference| / max(1, |analytic|)
// with the central difference (f(x+eps e_i) - f(x-eps e_i)) / (2 eps).
double grad_check(const TensorFn& f, const Tensor& point, double eps);

}  // namespace mutadetect
