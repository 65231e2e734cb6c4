#pragma once

#include <functional>
#include <vector>

#include "dualenc/tensor.hpp"

namespace dualenc {

// Compares reverse-mode gradients of a scalar-valued closure against central
// finite differences over every element of `inputs`, and returns the largest
// relative error. The closure must rebuild its graph from the inputs' current
// values on every call. Throws if the closure output is not scalar.
//
// Relative error uses max(|analytic|, |numeric|, 1e-3) as denominator so that
// finite-difference noise on near-zero gradients does not dominate.
double grad_check(const std::function<Tensor()>& make_loss, const std::vector<Tensor>& inputs,
                  double step = 1e-5);

bool grad_check_ok(const std::function<Tensor()>& make_loss, const std::vector<Tensor>& inputs,
                   double step, double tolerance);

}  // namespace dualenc
