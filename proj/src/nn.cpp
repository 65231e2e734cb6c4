#include "dualenc/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace dualenc {

Tensor init_uniform(Shape shape, int fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> data(numel(shape));
  for (auto& v : data) v = rng.next_uniform(-bound, bound);
  return Tensor::from_data(std::move(shape), std::move(data), /*requires_grad=*/true);
}

GruParams GruParams::create(int input_dim, int hidden_dim, Rng& rng) {
  if (input_dim <= 0 || hidden_dim <= 0) {
    throw std::invalid_argument("gru: dims must be positive, got input " +
                                std::to_string(input_dim) + ", hidden " +
                                std::to_string(hidden_dim));
  }
  GruParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  auto gate = [&](Tensor& w, Tensor& u, Tensor& b) {
    w = init_uniform({hidden_dim, input_dim}, input_dim, rng);
    u = init_uniform({hidden_dim, hidden_dim}, hidden_dim, rng);
    b = init_uniform({hidden_dim}, input_dim, rng);
  };
  gate(p.w_update, p.u_update, p.b_update);
  gate(p.w_reset, p.u_reset, p.b_reset);
  gate(p.w_cand, p.u_cand, p.b_cand);
  return p;
}

void GruParams::register_into(ParamList& params, const std::string& prefix) const {
  params.emplace_back(prefix + ".w_update", w_update);
  params.emplace_back(prefix + ".u_update", u_update);
  params.emplace_back(prefix + ".b_update", b_update);
  params.emplace_back(prefix + ".w_reset", w_reset);
  params.emplace_back(prefix + ".u_reset", u_reset);
  params.emplace_back(prefix + ".b_reset", b_reset);
  params.emplace_back(prefix + ".w_cand", w_cand);
  params.emplace_back(prefix + ".u_cand", u_cand);
  params.emplace_back(prefix + ".b_cand", b_cand);
}

Conv1dParams Conv1dParams::create(int kernel_size, int num_filters, int input_dim, Rng& rng) {
  if (kernel_size < 1 || num_filters <= 0 || input_dim <= 0) {
    throw std::invalid_argument("conv1d: bad config k=" + std::to_string(kernel_size) +
                                " r=" + std::to_string(num_filters) +
                                " d=" + std::to_string(input_dim));
  }
  Conv1dParams p;
  p.kernel_size = kernel_size;
  p.num_filters = num_filters;
  p.input_dim = input_dim;
  const int fan_in = kernel_size * input_dim;
  p.weight = init_uniform({num_filters, kernel_size, input_dim}, fan_in, rng);
  p.bias = init_uniform({num_filters}, fan_in, rng);
  return p;
}

void Conv1dParams::register_into(ParamList& params, const std::string& prefix) const {
  params.emplace_back(prefix + ".weight", weight);
  params.emplace_back(prefix + ".bias", bias);
}

BatchNormParams BatchNormParams::create(int dim) {
  if (dim <= 0) throw std::invalid_argument("batchnorm: dim must be positive");
  BatchNormParams p;
  p.dim = dim;
  p.gamma = Tensor::full({dim}, 1.0, /*requires_grad=*/true);
  p.beta = Tensor::zeros({dim}, /*requires_grad=*/true);
  p.running_mean = Tensor::zeros({dim});
  p.running_var = Tensor::full({dim}, 1.0);
  return p;
}

void BatchNormParams::register_into(ParamList& params, const std::string& prefix) const {
  params.emplace_back(prefix + ".gamma", gamma);
  params.emplace_back(prefix + ".beta", beta);
  params.emplace_back(prefix + ".running_mean", running_mean);
  params.emplace_back(prefix + ".running_var", running_var);
}

Tensor gru_cell(const Tensor& x, const Tensor& h_prev, const GruParams& p) {
  if (x.rank() != 1 || x.dim(0) != p.input_dim) {
    throw std::invalid_argument("gru_cell: input shape " + shape_to_string(x.shape()) +
                                " does not match input_dim " + std::to_string(p.input_dim));
  }
  if (h_prev.rank() != 1 || h_prev.dim(0) != p.hidden_dim) {
    throw std::invalid_argument("gru_cell: state shape " + shape_to_string(h_prev.shape()) +
                                " does not match hidden_dim " + std::to_string(p.hidden_dim));
  }
  Tensor z = sigmoid(add(matvec_affine(x, p.w_update, p.b_update),
                         matvec_affine(h_prev, p.u_update, Tensor::zeros({p.hidden_dim}))));
  Tensor r = sigmoid(add(matvec_affine(x, p.w_reset, p.b_reset),
                         matvec_affine(h_prev, p.u_reset, Tensor::zeros({p.hidden_dim}))));
  Tensor cand = tanh(add(matvec_affine(x, p.w_cand, p.b_cand),
                         matvec_affine(mul(r, h_prev), p.u_cand, Tensor::zeros({p.hidden_dim}))));
  // h = (1 - z) * h_prev + z * cand
  Tensor one_minus_z = sub(Tensor::full({p.hidden_dim}, 1.0), z);
  return add(mul(one_minus_z, h_prev), mul(z, cand));
}

Tensor bigru(const Tensor& sequence, const GruParams& fwd, const GruParams& bwd) {
  if (sequence.rank() != 2) {
    throw std::invalid_argument("bigru: expected {n, d} sequence, got " +
                                shape_to_string(sequence.shape()));
  }
  const int n = sequence.dim(0);
  std::vector<Tensor> fwd_states(static_cast<std::size_t>(n));
  Tensor h = Tensor::zeros({fwd.hidden_dim});
  for (int t = 0; t < n; ++t) {
    h = gru_cell(row(sequence, t), h, fwd);
    fwd_states[static_cast<std::size_t>(t)] = h;
  }
  std::vector<Tensor> bwd_states(static_cast<std::size_t>(n));
  h = Tensor::zeros({bwd.hidden_dim});
  for (int t = n - 1; t >= 0; --t) {
    h = gru_cell(row(sequence, t), h, bwd);
    bwd_states[static_cast<std::size_t>(t)] = h;  // backward state at frame t
  }
  std::vector<Tensor> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    rows.push_back(concat({fwd_states[static_cast<std::size_t>(t)],
                           bwd_states[static_cast<std::size_t>(t)]}));
  }
  return stack_rows(rows);
}

Tensor conv1d_relu_maxpool(const Tensor& feature_map, const Conv1dParams& p) {
  if (feature_map.rank() != 2 || feature_map.dim(1) != p.input_dim) {
    throw std::invalid_argument("conv1d: feature map " + shape_to_string(feature_map.shape()) +
                                " does not match filter input_dim " +
                                std::to_string(p.input_dim));
  }
  const int n = feature_map.dim(0);
  const int k = p.kernel_size, r = p.num_filters, d = p.input_dim;
  const int pad_left = (k - 1) / 2;
  const auto& x = feature_map.values();
  const auto& w = p.weight.values();
  const auto& b = p.bias.values();
  std::vector<double> conv(static_cast<std::size_t>(n) * r);
  for (int t = 0; t < n; ++t) {
    for (int f = 0; f < r; ++f) {
      double acc = b[f];
      for (int j = 0; j < k; ++j) {
        const int src = t - pad_left + j;
        if (src < 0 || src >= n) continue;
        const double* wrow = w.data() + (static_cast<std::size_t>(f) * k + j) * d;
        const double* xrow = x.data() + static_cast<std::size_t>(src) * d;
        for (int i = 0; i < d; ++i) acc += wrow[i] * xrow[i];
      }
      conv[static_cast<std::size_t>(t) * r + f] = acc;
    }
  }
  Tensor conv_map =
      detail::make_op({n, r}, std::move(conv),
                      {feature_map.node(), p.weight.node(), p.bias.node()},
                      [n, k, r, d, pad_left](detail::TapeNode& node) {
             auto& px = *node.parents[0];
             auto& pw = *node.parents[1];
             auto& pb = *node.parents[2];
             if (px.requires_grad) px.ensure_grad();
             if (pw.requires_grad) pw.ensure_grad();
             if (pb.requires_grad) pb.ensure_grad();
             for (int t = 0; t < n; ++t) {
               for (int f = 0; f < r; ++f) {
                 const double g = node.grad[static_cast<std::size_t>(t) * r + f];
                 if (g == 0.0) continue;
                 if (pb.requires_grad) pb.grad[f] += g;
                 for (int j = 0; j < k; ++j) {
                   const int src = t - pad_left + j;
                   if (src < 0 || src >= n) continue;
                   const std::size_t woff = (static_cast<std::size_t>(f) * k + j) * d;
                   const std::size_t xoff = static_cast<std::size_t>(src) * d;
                   if (pw.requires_grad)
                     for (int i = 0; i < d; ++i) pw.grad[woff + i] += g * px.value[xoff + i];
                   if (px.requires_grad)
                     for (int i = 0; i < d; ++i) px.grad[xoff + i] += g * pw.value[woff + i];
                 }
               }
             }
           });
  return pool_max(relu(conv_map));
}

Tensor batchnorm(const Tensor& x, BatchNormParams& p, BnMode mode) {
  if (x.rank() != 2 || x.dim(1) != p.dim) {
    throw std::invalid_argument("batchnorm: input " + shape_to_string(x.shape()) +
                                " does not match dim " + std::to_string(p.dim));
  }
  const int batch = x.dim(0), d = p.dim;
  if (mode == BnMode::kTrain && batch < 2) {
    throw std::invalid_argument("batchnorm: train mode needs batch >= 2, got " +
                                std::to_string(batch));
  }
  const auto& xv = x.values();
  std::vector<double> mean(static_cast<std::size_t>(d)), var(static_cast<std::size_t>(d));
  if (mode == BnMode::kTrain) {
    for (int i = 0; i < d; ++i) {
      double m = 0.0;
      for (int r = 0; r < batch; ++r) m += xv[static_cast<std::size_t>(r) * d + i];
      m /= batch;
      double v = 0.0;
      for (int r = 0; r < batch; ++r) {
        const double c = xv[static_cast<std::size_t>(r) * d + i] - m;
        v += c * c;
      }
      v /= batch;
      mean[static_cast<std::size_t>(i)] = m;
      var[static_cast<std::size_t>(i)] = v;
    }
    auto& rm = p.running_mean.mutable_values();
    auto& rv = p.running_var.mutable_values();
    for (int i = 0; i < d; ++i) {
      rm[static_cast<std::size_t>(i)] =
          (1.0 - p.momentum) * rm[static_cast<std::size_t>(i)] + p.momentum * mean[static_cast<std::size_t>(i)];
      rv[static_cast<std::size_t>(i)] =
          (1.0 - p.momentum) * rv[static_cast<std::size_t>(i)] + p.momentum * var[static_cast<std::size_t>(i)];
    }
  } else {
    mean = p.running_mean.values();
    var = p.running_var.values();
  }

  const auto& gv = p.gamma.values();
  const auto& bv = p.beta.values();
  const double eps = p.epsilon;
  std::vector<double> inv_std(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i)
    inv_std[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(var[static_cast<std::size_t>(i)] + eps);
  std::vector<double> normalized(xv.size());
  std::vector<double> out(xv.size());
  for (int r = 0; r < batch; ++r) {
    for (int i = 0; i < d; ++i) {
      const std::size_t idx = static_cast<std::size_t>(r) * d + i;
      normalized[idx] = (xv[idx] - mean[static_cast<std::size_t>(i)]) * inv_std[static_cast<std::size_t>(i)];
      out[idx] = gv[static_cast<std::size_t>(i)] * normalized[idx] + bv[static_cast<std::size_t>(i)];
    }
  }

  const bool train = mode == BnMode::kTrain;
  return detail::make_op(
      {batch, d}, std::move(out), {x.node(), p.gamma.node(), p.beta.node()},
      [batch, d, train, inv_std = std::move(inv_std),
       normalized = std::move(normalized)](detail::TapeNode& n) {
        auto& px = *n.parents[0];
        auto& pg = *n.parents[1];
        auto& pb = *n.parents[2];
        if (px.requires_grad) px.ensure_grad();
        if (pg.requires_grad) pg.ensure_grad();
        if (pb.requires_grad) pb.ensure_grad();
        for (int i = 0; i < d; ++i) {
          double sum_g = 0.0, sum_gx = 0.0;
          for (int r = 0; r < batch; ++r) {
            const std::size_t idx = static_cast<std::size_t>(r) * d + i;
            sum_g += n.grad[idx];
            sum_gx += n.grad[idx] * normalized[idx];
          }
          if (pg.requires_grad) pg.grad[static_cast<std::size_t>(i)] += sum_gx;
          if (pb.requires_grad) pb.grad[static_cast<std::size_t>(i)] += sum_g;
          if (px.requires_grad) {
            const double gamma = pg.value[static_cast<std::size_t>(i)];
            const double istd = inv_std[static_cast<std::size_t>(i)];
            for (int r = 0; r < batch; ++r) {
              const std::size_t idx = static_cast<std::size_t>(r) * d + i;
              if (train) {
                // gradient through the batch statistics
                px.grad[idx] += gamma * istd *
                                (n.grad[idx] - sum_g / batch - normalized[idx] * sum_gx / batch);
              } else {
                px.grad[idx] += gamma * istd * n.grad[idx];
              }
            }
          }
        }
      });
}

}  // namespace dualenc
