#pragma once

#include <vector>

#include "dualenc/nn.hpp"
#include "dualenc/rng.hpp"
#include "dualenc/tensor.hpp"
#include "oracles.hpp"

namespace testutil {

inline dualenc::Tensor tensor1d(const std::vector<double>& v, bool requires_grad = false) {
  return dualenc::Tensor::from_data({static_cast<int>(v.size())}, v, requires_grad);
}

inline dualenc::Tensor tensor2d(const oracle::Mat& m, bool requires_grad = false) {
  std::vector<double> flat;
  for (const auto& row : m) flat.insert(flat.end(), row.begin(), row.end());
  return dualenc::Tensor::from_data(
      {static_cast<int>(m.size()), static_cast<int>(m.front().size())}, flat, requires_grad);
}

inline oracle::Vec to_vec(const dualenc::Tensor& t) { return t.values(); }

inline oracle::Mat to_mat(const dualenc::Tensor& t) {
  oracle::Mat m(static_cast<std::size_t>(t.dim(0)),
                oracle::Vec(static_cast<std::size_t>(t.dim(1))));
  const auto& v = t.values();
  for (std::size_t r = 0; r < m.size(); ++r)
    for (std::size_t c = 0; c < m[r].size(); ++c) m[r][c] = v[r * m[r].size() + c];
  return m;
}

inline oracle::Vec random_vec(dualenc::Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  oracle::Vec v(n);
  for (auto& x : v) x = rng.next_uniform(lo, hi);
  return v;
}

inline oracle::Mat random_mat(dualenc::Rng& rng, std::size_t rows, std::size_t cols,
                              double lo = -1.0, double hi = 1.0) {
  oracle::Mat m(rows);
  for (auto& r : m) r = random_vec(rng, cols, lo, hi);
  return m;
}

inline oracle::GruWeights gru_weights_of(const dualenc::GruParams& p) {
  oracle::GruWeights g;
  g.wz = to_mat(p.w_update);
  g.uz = to_mat(p.u_update);
  g.bz = to_vec(p.b_update);
  g.wr = to_mat(p.w_reset);
  g.ur = to_mat(p.u_reset);
  g.br = to_vec(p.b_reset);
  g.wc = to_mat(p.w_cand);
  g.uc = to_mat(p.u_cand);
  g.bc = to_vec(p.b_cand);
  return g;
}

inline double max_abs_diff(const oracle::Vec& a, const oracle::Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

inline double max_rel_diff(const oracle::Vec& a, const oracle::Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::fabs(a[i]), std::fabs(b[i]), 1e-12});
    m = std::max(m, std::fabs(a[i] - b[i]) / denom);
  }
  return m;
}

}  // namespace testutil
