#include "dualenc/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dualenc {

double grad_check(const std::function<Tensor()>& make_loss, const std::vector<Tensor>& inputs,
                  double step) {
  if (step <= 0.0) throw std::invalid_argument("grad_check: step must be positive");

  Tensor loss = make_loss();
  if (loss.size() != 1) {
    throw std::invalid_argument("grad_check: closure must produce a scalar, got shape " +
                                shape_to_string(loss.shape()));
  }
  for (auto input : inputs) input.zero_grad();
  // A closure that ignores every input (constant output) has no tape; both
  // gradient routes are then identically zero.
  if (loss.requires_grad()) backward(loss);

  std::vector<std::vector<double>> analytic;
  analytic.reserve(inputs.size());
  for (const auto& input : inputs) {
    analytic.push_back(input.has_grad() ? input.grad()
                                        : std::vector<double>(input.size(), 0.0));
  }

  double max_rel_err = 0.0;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    Tensor input = inputs[t];
    auto& values = input.mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + step;
      const double plus = make_loss().item();
      values[i] = saved - step;
      const double minus = make_loss().item();
      values[i] = saved;
      const double numeric = (plus - minus) / (2.0 * step);
      const double a = analytic[t][i];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-3});
      max_rel_err = std::max(max_rel_err, std::fabs(a - numeric) / denom);
    }
  }
  return max_rel_err;
}

bool grad_check_ok(const std::function<Tensor()>& make_loss, const std::vector<Tensor>& inputs,
                   double step, double tolerance) {
  return grad_check(make_loss, inputs, step) < tolerance;
}

}  // namespace dualenc
