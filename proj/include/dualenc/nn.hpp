#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dualenc/ops.hpp"
#include "dualenc/rng.hpp"
#include "dualenc/tensor.hpp"

namespace dualenc {

// Named tensors in registration order; shared by the optimizer and the
// checkpoint writer. Includes non-learnable buffers (running statistics),
// which the optimizer skips via requires_grad.
using ParamList = std::vector<std::pair<std::string, Tensor>>;

// uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)]
Tensor init_uniform(Shape shape, int fan_in, Rng& rng);

struct GruParams {
  int input_dim = 0;
  int hidden_dim = 0;
  Tensor w_update, u_update, b_update;  // z gate
  Tensor w_reset, u_reset, b_reset;     // r gate
  Tensor w_cand, u_cand, b_cand;        // candidate state

  static GruParams create(int input_dim, int hidden_dim, Rng& rng);
  void register_into(ParamList& params, const std::string& prefix) const;
};

struct Conv1dParams {
  int kernel_size = 0;  // >= 1; width 1 is only useful in tests
  int num_filters = 0;
  int input_dim = 0;
  Tensor weight;  // {r, k, D}
  Tensor bias;    // {r}

  static Conv1dParams create(int kernel_size, int num_filters, int input_dim, Rng& rng);
  void register_into(ParamList& params, const std::string& prefix) const;
};

struct BatchNormParams {
  int dim = 0;
  double momentum = 0.1;
  double epsilon = 1e-5;
  Tensor gamma, beta;               // learnable
  Tensor running_mean, running_var;  // buffers, updated in train mode

  static BatchNormParams create(int dim);
  void register_into(ParamList& params, const std::string& prefix) const;
};

enum class BnMode { kTrain, kEval };

// h_t = (1 - z) * h_prev + z * h_cand, gates per the standard GRU cell.
Tensor gru_cell(const Tensor& x, const Tensor& h_prev, const GruParams& p);

// Bidirectional GRU over an {n, d} sequence; zero initial states. Output row t
// concatenates the forward state after frames 1..t with the backward state
// after frames n..t, giving an {n, 2H} feature map.
Tensor bigru(const Tensor& sequence, const GruParams& fwd, const GruParams& bwd);

// Convolution with zero padding to keep length n (floor((k-1)/2) zeros on the
// left, the rest on the right), ReLU, then max over time -> {r}.
Tensor conv1d_relu_maxpool(const Tensor& feature_map, const Conv1dParams& p);

// Train mode normalizes by batch statistics (batch >= 2) and updates the
// running buffers; eval mode normalizes by the running statistics.
Tensor batchnorm(const Tensor& x, BatchNormParams& p, BnMode mode);

}  // namespace dualenc
