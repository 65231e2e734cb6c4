#pragma once

// Reference implementations written as direct scalar loops over nested
// vectors. Deliberately independent of the tensor library: these are the
// second route that the library is checked against.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vec matvec(const Mat& w, const Vec& x) {
  Vec y(w.size(), 0.0);
  for (std::size_t r = 0; r < w.size(); ++r)
    for (std::size_t c = 0; c < x.size(); ++c) y[r] += w[r][c] * x[c];
  return y;
}

struct GruWeights {
  Mat wz, uz;
  Vec bz;
  Mat wr, ur;
  Vec br;
  Mat wc, uc;
  Vec bc;
};

inline Vec gru_cell(const Vec& x, const Vec& h, const GruWeights& g) {
  const std::size_t hd = h.size();
  Vec z = matvec(g.wz, x), r = matvec(g.wr, x), c = matvec(g.wc, x);
  Vec zu = matvec(g.uz, h), ru = matvec(g.ur, h);
  Vec out(hd);
  Vec rh(hd);
  for (std::size_t i = 0; i < hd; ++i) {
    z[i] = sigmoid(z[i] + zu[i] + g.bz[i]);
    r[i] = sigmoid(r[i] + ru[i] + g.br[i]);
    rh[i] = r[i] * h[i];
  }
  Vec cu = matvec(g.uc, rh);
  for (std::size_t i = 0; i < hd; ++i) {
    const double cand = std::tanh(c[i] + cu[i] + g.bc[i]);
    out[i] = (1.0 - z[i]) * h[i] + z[i] * cand;
  }
  return out;
}

// rows aligned per frame: row t = [forward state at t, backward state at t]
inline Mat bigru(const Mat& seq, const GruWeights& fwd, const GruWeights& bwd, std::size_t hidden) {
  const std::size_t n = seq.size();
  Mat fstates(n), bstates(n);
  Vec h(hidden, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    h = gru_cell(seq[t], h, fwd);
    fstates[t] = h;
  }
  h.assign(hidden, 0.0);
  for (std::size_t t = n; t-- > 0;) {
    h = gru_cell(seq[t], h, bwd);
    bstates[t] = h;
  }
  Mat out(n);
  for (std::size_t t = 0; t < n; ++t) {
    out[t] = fstates[t];
    out[t].insert(out[t].end(), bstates[t].begin(), bstates[t].end());
  }
  return out;
}

// filters: r entries, each {k rows of D}; zero padding keeps output length n
inline Vec conv1d_relu_maxpool(const Mat& h, const std::vector<Mat>& filters, const Vec& bias) {
  const int n = static_cast<int>(h.size());
  const int k = static_cast<int>(filters.front().size());
  const int pad_left = (k - 1) / 2;
  Vec out(filters.size(), 0.0);
  for (std::size_t f = 0; f < filters.size(); ++f) {
    double best = 0.0;  // ReLU floor: max over time of non-negative activations
    for (int t = 0; t < n; ++t) {
      double acc = bias[f];
      for (int j = 0; j < k; ++j) {
        const int src = t - pad_left + j;
        if (src < 0 || src >= n) continue;
        for (std::size_t i = 0; i < h[static_cast<std::size_t>(src)].size(); ++i)
          acc += filters[f][static_cast<std::size_t>(j)][i] * h[static_cast<std::size_t>(src)][i];
      }
      best = std::max(best, std::max(acc, 0.0));
    }
    out[f] = best;
  }
  return out;
}

inline Mat batchnorm_train(const Mat& x, const Vec& gamma, const Vec& beta, double eps) {
  const std::size_t b = x.size(), d = x.front().size();
  Mat out(b, Vec(d));
  for (std::size_t i = 0; i < d; ++i) {
    double mean = 0.0;
    for (std::size_t r = 0; r < b; ++r) mean += x[r][i];
    mean /= static_cast<double>(b);
    double var = 0.0;
    for (std::size_t r = 0; r < b; ++r) var += (x[r][i] - mean) * (x[r][i] - mean);
    var /= static_cast<double>(b);
    for (std::size_t r = 0; r < b; ++r)
      out[r][i] = gamma[i] * (x[r][i] - mean) / std::sqrt(var + eps) + beta[i];
  }
  return out;
}

inline Mat batchnorm_eval(const Mat& x, const Vec& gamma, const Vec& beta, const Vec& mean,
                          const Vec& var, double eps) {
  Mat out(x.size(), Vec(x.front().size()));
  for (std::size_t r = 0; r < x.size(); ++r)
    for (std::size_t i = 0; i < x[r].size(); ++i)
      out[r][i] = gamma[i] * (x[r][i] - mean[i]) / std::sqrt(var[i] + eps) + beta[i];
  return out;
}

inline double cosine(const Vec& a, const Vec& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double jaccard(const Vec& a, const Vec& b) {
  double mins = 0.0, maxs = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mins += std::min(a[i], b[i]);
    maxs += std::max(a[i], b[i]);
  }
  return maxs == 0.0 ? 0.0 : mins / maxs;
}

inline double bce_pair(const Vec& gv, const Vec& gs, const Vec& y, double eps) {
  const double k = static_cast<double>(y.size());
  auto clamp = [eps](double v) { return std::min(std::max(v, eps), 1.0 - eps); };
  double loss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    loss -= (y[i] * std::log(clamp(gv[i])) + (1.0 - y[i]) * std::log(1.0 - clamp(gv[i]))) / k;
    loss -= (y[i] * std::log(clamp(gs[i])) + (1.0 - y[i]) * std::log(1.0 - clamp(gs[i]))) / k;
  }
  return loss;
}

// exhaustive hinge evaluation over every diagonal pair
inline double triplet_hardest(const Mat& s, double margin) {
  const std::size_t b = s.size();
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    double worst_sent = -1e300, worst_vid = -1e300;
    for (std::size_t j = 0; j < b; ++j) {
      if (j == i) continue;
      worst_sent = std::max(worst_sent, s[i][j]);
      worst_vid = std::max(worst_vid, s[j][i]);
    }
    total += std::max(0.0, margin + worst_sent - s[i][i]);
    total += std::max(0.0, margin + worst_vid - s[i][i]);
  }
  return total;
}

}  // namespace oracle
