#include "dualenc/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dualenc {

namespace {

using detail::TapeNode;
using detail::make_op;
using NodePtr = std::shared_ptr<TapeNode>;

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                shape_to_string(a.shape()) + " vs " + shape_to_string(b.shape()));
  }
}

void check_rank(const char* op, const Tensor& t, int rank) {
  if (t.rank() != rank) {
    throw std::invalid_argument(std::string(op) + ": expected rank " + std::to_string(rank) +
                                " tensor, got shape " + shape_to_string(t.shape()));
  }
}

Tensor elementwise_binary(const char* op, const Tensor& a, const Tensor& b, double sign_b) {
  check_same_shape(op, a, b);
  std::vector<double> out(a.size());
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + sign_b * bv[i];
  return make_op(a.shape(), std::move(out), {a.node(), b.node()},
                     [sign_b](TapeNode& n) {
                       auto& pa = *n.parents[0];
                       auto& pb = *n.parents[1];
                       if (pa.requires_grad) {
                         pa.ensure_grad();
                         for (std::size_t i = 0; i < n.grad.size(); ++i) pa.grad[i] += n.grad[i];
                       }
                       if (pb.requires_grad) {
                         pb.ensure_grad();
                         for (std::size_t i = 0; i < n.grad.size(); ++i)
                           pb.grad[i] += sign_b * n.grad[i];
                       }
                     });
}

Tensor elementwise_unary(const Tensor& a, double (*fwd)(double),
                         double (*dydx_from)(double x, double y)) {
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i]);
  return make_op(a.shape(), std::move(out), {a.node()}, [dydx_from](TapeNode& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    p.ensure_grad();
    for (std::size_t i = 0; i < n.grad.size(); ++i)
      p.grad[i] += n.grad[i] * dydx_from(p.value[i], n.value[i]);
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return elementwise_binary("add", a, b, 1.0); }
Tensor sub(const Tensor& a, const Tensor& b) { return elementwise_binary("sub", a, b, -1.0); }

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape("mul", a, b);
  std::vector<double> out(a.size());
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return make_op(a.shape(), std::move(out), {a.node(), b.node()}, [](TapeNode& n) {
    auto& pa = *n.parents[0];
    auto& pb = *n.parents[1];
    if (pa.requires_grad) {
      pa.ensure_grad();
      for (std::size_t i = 0; i < n.grad.size(); ++i) pa.grad[i] += n.grad[i] * pb.value[i];
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      for (std::size_t i = 0; i < n.grad.size(); ++i) pb.grad[i] += n.grad[i] * pa.value[i];
    }
  });
}

Tensor scale(const Tensor& a, double c) {
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * av[i];
  return make_op(a.shape(), std::move(out), {a.node()}, [c](TapeNode& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    p.ensure_grad();
    for (std::size_t i = 0; i < n.grad.size(); ++i) p.grad[i] += c * n.grad[i];
  });
}

Tensor sigmoid(const Tensor& a) {
  return elementwise_unary(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return elementwise_unary(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& a) {
  return elementwise_unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.values()) total += v;
  return make_op({1}, {total}, {a.node()}, [](TapeNode& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    p.ensure_grad();
    for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += n.grad[0];
  });
}

Tensor concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no tensors given");
  std::vector<double> out;
  std::vector<NodePtr> parents;
  for (const auto& t : parts) {
    check_rank("concat", t, 1);
    out.insert(out.end(), t.values().begin(), t.values().end());
    parents.push_back(t.node());
  }
  const int total = static_cast<int>(out.size());
  return make_op({total}, std::move(out), std::move(parents),
                     [](TapeNode& n) {
                       std::size_t offset = 0;
                       for (auto& pp : n.parents) {
                         auto& p = *pp;
                         if (p.requires_grad) {
                           p.ensure_grad();
                           for (std::size_t i = 0; i < p.value.size(); ++i)
                             p.grad[i] += n.grad[offset + i];
                         }
                         offset += p.value.size();
                       }
                     });
}

Tensor stack_rows(const std::vector<Tensor>& rows) {
  if (rows.empty()) throw std::invalid_argument("stack_rows: no tensors given");
  const int d = rows.front().dim(0);
  std::vector<double> out;
  out.reserve(rows.size() * static_cast<std::size_t>(d));
  std::vector<NodePtr> parents;
  for (const auto& t : rows) {
    check_rank("stack_rows", t, 1);
    if (t.dim(0) != d) {
      throw std::invalid_argument("stack_rows: shape mismatch " + shape_to_string(t.shape()) +
                                  " vs " + shape_to_string(rows.front().shape()));
    }
    out.insert(out.end(), t.values().begin(), t.values().end());
    parents.push_back(t.node());
  }
  return make_op({static_cast<int>(rows.size()), d}, std::move(out), std::move(parents),
                     [d](TapeNode& n) {
                       for (std::size_t r = 0; r < n.parents.size(); ++r) {
                         auto& p = *n.parents[r];
                         if (!p.requires_grad) continue;
                         p.ensure_grad();
                         for (int i = 0; i < d; ++i)
                           p.grad[i] += n.grad[r * static_cast<std::size_t>(d) + i];
                       }
                     });
}

Tensor row(const Tensor& x, int index) {
  check_rank("row", x, 2);
  const int n = x.dim(0), d = x.dim(1);
  if (index < 0 || index >= n) {
    throw std::out_of_range("row: index " + std::to_string(index) + " outside matrix " +
                            shape_to_string(x.shape()));
  }
  const auto& xv = x.values();
  std::vector<double> out(xv.begin() + static_cast<std::size_t>(index) * d,
                          xv.begin() + static_cast<std::size_t>(index + 1) * d);
  return make_op({d}, std::move(out), {x.node()}, [index, d](TapeNode& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    p.ensure_grad();
    for (int i = 0; i < d; ++i) p.grad[static_cast<std::size_t>(index) * d + i] += n.grad[i];
  });
}

Tensor matvec_affine(const Tensor& x, const Tensor& w, const Tensor& b) {
  check_rank("matvec_affine", w, 2);
  check_rank("matvec_affine", b, 1);
  const int out_dim = w.dim(0), in_dim = w.dim(1);
  if (b.dim(0) != out_dim) {
    throw std::invalid_argument("matvec_affine: bias shape " + shape_to_string(b.shape()) +
                                " does not match weight " + shape_to_string(w.shape()));
  }
  const bool batched = x.rank() == 2;
  if (!batched) check_rank("matvec_affine", x, 1);
  const int batch = batched ? x.dim(0) : 1;
  const int x_in = batched ? x.dim(1) : x.dim(0);
  if (x_in != in_dim) {
    throw std::invalid_argument("matvec_affine: input shape " + shape_to_string(x.shape()) +
                                " does not match weight " + shape_to_string(w.shape()));
  }

  const auto& xv = x.values();
  const auto& wv = w.values();
  const auto& bv = b.values();
  std::vector<double> out(static_cast<std::size_t>(batch) * out_dim);
  for (int r = 0; r < batch; ++r) {
    const double* xr = xv.data() + static_cast<std::size_t>(r) * in_dim;
    double* yr = out.data() + static_cast<std::size_t>(r) * out_dim;
    for (int o = 0; o < out_dim; ++o) {
      const double* wo = wv.data() + static_cast<std::size_t>(o) * in_dim;
      double acc = bv[o];
      for (int i = 0; i < in_dim; ++i) acc += wo[i] * xr[i];
      yr[o] = acc;
    }
  }
  Shape out_shape = batched ? Shape{batch, out_dim} : Shape{out_dim};
  return make_op(std::move(out_shape), std::move(out), {x.node(), w.node(), b.node()},
                     [batch, out_dim, in_dim](TapeNode& n) {
                       auto& px = *n.parents[0];
                       auto& pw = *n.parents[1];
                       auto& pb = *n.parents[2];
                       if (px.requires_grad) px.ensure_grad();
                       if (pw.requires_grad) pw.ensure_grad();
                       if (pb.requires_grad) pb.ensure_grad();
                       for (int r = 0; r < batch; ++r) {
                         const double* g = n.grad.data() + static_cast<std::size_t>(r) * out_dim;
                         const double* xr = px.value.data() + static_cast<std::size_t>(r) * in_dim;
                         for (int o = 0; o < out_dim; ++o) {
                           const double go = g[o];
                           if (go == 0.0) continue;
                           const std::size_t wrow = static_cast<std::size_t>(o) * in_dim;
                           if (px.requires_grad) {
                             double* gx = px.grad.data() + static_cast<std::size_t>(r) * in_dim;
                             for (int i = 0; i < in_dim; ++i) gx[i] += go * pw.value[wrow + i];
                           }
                           if (pw.requires_grad) {
                             for (int i = 0; i < in_dim; ++i) pw.grad[wrow + i] += go * xr[i];
                           }
                           if (pb.requires_grad) pb.grad[o] += go;
                         }
                       }
                     });
}

Tensor pool_mean(const Tensor& x) {
  check_rank("pool_mean", x, 2);
  const int n = x.dim(0), d = x.dim(1);
  std::vector<double> out(d, 0.0);
  const auto& xv = x.values();
  for (int t = 0; t < n; ++t)
    for (int i = 0; i < d; ++i) out[i] += xv[static_cast<std::size_t>(t) * d + i];
  for (int i = 0; i < d; ++i) out[i] /= n;
  return make_op({d}, std::move(out), {x.node()}, [n, d](TapeNode& node) {
    auto& p = *node.parents[0];
    if (!p.requires_grad) return;
    p.ensure_grad();
    const double inv = 1.0 / n;
    for (int t = 0; t < n; ++t)
      for (int i = 0; i < d; ++i) p.grad[static_cast<std::size_t>(t) * d + i] += inv * node.grad[i];
  });
}

Tensor pool_max(const Tensor& x) {
  check_rank("pool_max", x, 2);
  const int n = x.dim(0), d = x.dim(1);
  const auto& xv = x.values();
  std::vector<double> out(d);
  std::vector<int> argmax(d, 0);
  for (int i = 0; i < d; ++i) {
    double best = xv[i];
    int best_t = 0;
    for (int t = 1; t < n; ++t) {
      double v = xv[static_cast<std::size_t>(t) * d + i];
      if (v > best) {
        best = v;
        best_t = t;
      }
    }
    out[i] = best;
    argmax[i] = best_t;
  }
  return make_op({d}, std::move(out), {x.node()},
                     [argmax = std::move(argmax), d](TapeNode& node) {
                       auto& p = *node.parents[0];
                       if (!p.requires_grad) return;
                       p.ensure_grad();
                       for (int i = 0; i < d; ++i)
                         p.grad[static_cast<std::size_t>(argmax[i]) * d + i] += node.grad[i];
                     });
}

Tensor embedding_rows(const Tensor& table, const std::vector<int>& indices) {
  check_rank("embedding_rows", table, 2);
  if (indices.empty()) throw std::invalid_argument("embedding_rows: empty index list");
  const int vocab = table.dim(0), d = table.dim(1);
  for (int id : indices) {
    if (id < 0 || id >= vocab) {
      throw std::out_of_range("embedding_rows: index " + std::to_string(id) +
                              " outside table " + shape_to_string(table.shape()));
    }
  }
  const auto& tv = table.values();
  std::vector<double> out(indices.size() * static_cast<std::size_t>(d));
  for (std::size_t t = 0; t < indices.size(); ++t) {
    const double* src = tv.data() + static_cast<std::size_t>(indices[t]) * d;
    std::copy(src, src + d, out.data() + t * static_cast<std::size_t>(d));
  }
  return make_op({static_cast<int>(indices.size()), d}, std::move(out), {table.node()},
                     [indices, d](TapeNode& node) {
                       auto& p = *node.parents[0];
                       if (!p.requires_grad) return;
                       p.ensure_grad();
                       for (std::size_t t = 0; t < indices.size(); ++t) {
                         double* dst = p.grad.data() + static_cast<std::size_t>(indices[t]) * d;
                         const double* g = node.grad.data() + t * static_cast<std::size_t>(d);
                         for (int i = 0; i < d; ++i) dst[i] += g[i];
                       }
                     });
}

Tensor cosine_matrix(const Tensor& a, const Tensor& b) {
  check_rank("cosine_matrix", a, 2);
  check_rank("cosine_matrix", b, 2);
  if (a.dim(1) != b.dim(1)) {
    throw std::invalid_argument("cosine_matrix: shape mismatch " + shape_to_string(a.shape()) +
                                " vs " + shape_to_string(b.shape()));
  }
  const int ba = a.dim(0), bb = b.dim(0), d = a.dim(1);
  const auto& av = a.values();
  const auto& bv = b.values();
  auto norms = [d](const std::vector<double>& v, int count, const char* side) {
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) {
      double s = 0.0;
      const double* p = v.data() + static_cast<std::size_t>(i) * d;
      for (int k = 0; k < d; ++k) s += p[k] * p[k];
      if (s == 0.0) {
        throw std::invalid_argument(std::string("cosine_matrix: zero vector in ") + side +
                                    " row " + std::to_string(i));
      }
      out[i] = std::sqrt(s);
    }
    return out;
  };
  std::vector<double> na = norms(av, ba, "first argument");
  std::vector<double> nb = norms(bv, bb, "second argument");
  std::vector<double> out(static_cast<std::size_t>(ba) * bb);
  for (int i = 0; i < ba; ++i) {
    const double* ai = av.data() + static_cast<std::size_t>(i) * d;
    for (int j = 0; j < bb; ++j) {
      const double* bj = bv.data() + static_cast<std::size_t>(j) * d;
      double dot = 0.0;
      for (int k = 0; k < d; ++k) dot += ai[k] * bj[k];
      out[static_cast<std::size_t>(i) * bb + j] = dot / (na[i] * nb[j]);
    }
  }
  return make_op(
      {ba, bb}, std::move(out), {a.node(), b.node()},
      [ba, bb, d, na = std::move(na), nb = std::move(nb)](TapeNode& node) {
        auto& pa = *node.parents[0];
        auto& pb = *node.parents[1];
        if (pa.requires_grad) pa.ensure_grad();
        if (pb.requires_grad) pb.ensure_grad();
        for (int i = 0; i < ba; ++i) {
          const double* ai = pa.value.data() + static_cast<std::size_t>(i) * d;
          for (int j = 0; j < bb; ++j) {
            const double g = node.grad[static_cast<std::size_t>(i) * bb + j];
            if (g == 0.0) continue;
            const double s = node.value[static_cast<std::size_t>(i) * bb + j];
            const double* bj = pb.value.data() + static_cast<std::size_t>(j) * d;
            const double inv = 1.0 / (na[i] * nb[j]);
            if (pa.requires_grad) {
              double* ga = pa.grad.data() + static_cast<std::size_t>(i) * d;
              const double c = s / (na[i] * na[i]);
              for (int k = 0; k < d; ++k) ga[k] += g * (bj[k] * inv - c * ai[k]);
            }
            if (pb.requires_grad) {
              double* gb = pb.grad.data() + static_cast<std::size_t>(j) * d;
              const double c = s / (nb[j] * nb[j]);
              for (int k = 0; k < d; ++k) gb[k] += g * (ai[k] * inv - c * bj[k]);
            }
          }
        }
      });
}

Tensor jaccard_matrix(const Tensor& a, const Tensor& b) {
  check_rank("jaccard_matrix", a, 2);
  check_rank("jaccard_matrix", b, 2);
  if (a.dim(1) != b.dim(1)) {
    throw std::invalid_argument("jaccard_matrix: shape mismatch " + shape_to_string(a.shape()) +
                                " vs " + shape_to_string(b.shape()));
  }
  for (double v : a.values())
    if (v < 0.0) throw std::invalid_argument("jaccard_matrix: negative entry in first argument");
  for (double v : b.values())
    if (v < 0.0) throw std::invalid_argument("jaccard_matrix: negative entry in second argument");
  const int ba = a.dim(0), bb = b.dim(0), d = a.dim(1);
  const auto& av = a.values();
  const auto& bv = b.values();
  std::vector<double> out(static_cast<std::size_t>(ba) * bb);
  std::vector<double> denom(out.size());
  for (int i = 0; i < ba; ++i) {
    const double* ai = av.data() + static_cast<std::size_t>(i) * d;
    for (int j = 0; j < bb; ++j) {
      const double* bj = bv.data() + static_cast<std::size_t>(j) * d;
      double mins = 0.0, maxs = 0.0;
      for (int k = 0; k < d; ++k) {
        mins += std::min(ai[k], bj[k]);
        maxs += std::max(ai[k], bj[k]);
      }
      const std::size_t idx = static_cast<std::size_t>(i) * bb + j;
      denom[idx] = maxs;
      out[idx] = maxs == 0.0 ? 0.0 : mins / maxs;
    }
  }
  return make_op(
      {ba, bb}, std::move(out), {a.node(), b.node()},
      [ba, bb, d, denom = std::move(denom)](TapeNode& node) {
        auto& pa = *node.parents[0];
        auto& pb = *node.parents[1];
        if (pa.requires_grad) pa.ensure_grad();
        if (pb.requires_grad) pb.ensure_grad();
        for (int i = 0; i < ba; ++i) {
          const double* ai = pa.value.data() + static_cast<std::size_t>(i) * d;
          for (int j = 0; j < bb; ++j) {
            const std::size_t idx = static_cast<std::size_t>(i) * bb + j;
            const double g = node.grad[idx];
            if (g == 0.0 || denom[idx] == 0.0) continue;
            const double s = node.value[idx];
            const double inv = 1.0 / denom[idx];
            const double* bj = pb.value.data() + static_cast<std::size_t>(j) * d;
            for (int k = 0; k < d; ++k) {
              // at ties the min acts as the first argument, the max as the second
              const bool a_is_min = ai[k] <= bj[k];
              if (pa.requires_grad)
                pa.grad[static_cast<std::size_t>(i) * d + k] += g * (a_is_min ? inv : -s * inv);
              if (pb.requires_grad)
                pb.grad[static_cast<std::size_t>(j) * d + k] += g * (a_is_min ? -s * inv : inv);
            }
          }
        }
      });
}

Tensor triplet_loss_hardest(const Tensor& s, double margin) {
  check_rank("triplet_loss_hardest", s, 2);
  const int b = s.dim(0);
  if (s.dim(1) != b) {
    throw std::invalid_argument("triplet_loss_hardest: similarity matrix must be square, got " +
                                shape_to_string(s.shape()));
  }
  if (b < 2) {
    throw std::invalid_argument(
        "triplet_loss_hardest: batch of " + std::to_string(b) +
        " has no negatives; need at least 2 pairs");
  }
  const auto& sv = s.values();
  auto at = [&](int i, int j) { return sv[static_cast<std::size_t>(i) * b + j]; };
  std::vector<int> hard_col(b), hard_row(b);  // s-neg column per row i; v-neg row per column i
  double total = 0.0;
  for (int i = 0; i < b; ++i) {
    int jc = i == 0 ? 1 : 0;
    for (int j = 0; j < b; ++j)
      if (j != i && at(i, j) > at(i, jc)) jc = j;
    int jr = i == 0 ? 1 : 0;
    for (int j = 0; j < b; ++j)
      if (j != i && at(j, i) > at(jr, i)) jr = j;
    hard_col[i] = jc;
    hard_row[i] = jr;
    total += std::max(0.0, margin + at(i, jc) - at(i, i));
    total += std::max(0.0, margin + at(jr, i) - at(i, i));
  }
  return make_op(
      {1}, {total}, {s.node()},
      [b, margin, hard_col = std::move(hard_col), hard_row = std::move(hard_row)](TapeNode& node) {
        auto& p = *node.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        const double g = node.grad[0];
        auto at = [&](int i, int j) { return p.value[static_cast<std::size_t>(i) * b + j]; };
        auto gat = [&](int i, int j) -> double& {
          return p.grad[static_cast<std::size_t>(i) * b + j];
        };
        for (int i = 0; i < b; ++i) {
          if (margin + at(i, hard_col[i]) - at(i, i) > 0.0) {
            gat(i, hard_col[i]) += g;
            gat(i, i) -= g;
          }
          if (margin + at(hard_row[i], i) - at(i, i) > 0.0) {
            gat(hard_row[i], i) += g;
            gat(i, i) -= g;
          }
        }
      });
}

Tensor bce_concept_loss(const Tensor& gv, const Tensor& gs, const Tensor& y, double clamp_eps) {
  check_same_shape("bce_concept_loss", gv, gs);
  check_same_shape("bce_concept_loss", gv, y);
  if (gv.rank() != 1 && gv.rank() != 2) {
    throw std::invalid_argument("bce_concept_loss: expected {K} or {B, K}, got " +
                                shape_to_string(gv.shape()));
  }
  for (double t : y.values()) {
    if (t < 0.0 || t > 1.0)
      throw std::invalid_argument("bce_concept_loss: target outside [0, 1]: " + std::to_string(t));
  }
  const int k = gv.rank() == 1 ? gv.dim(0) : gv.dim(1);
  const double lo = clamp_eps, hi = 1.0 - clamp_eps;
  auto clamp = [lo, hi](double v) { return std::min(std::max(v, lo), hi); };
  const auto& gvv = gv.values();
  const auto& gsv = gs.values();
  const auto& yv = y.values();
  double total = 0.0;
  for (std::size_t i = 0; i < gvv.size(); ++i) {
    const double cv = clamp(gvv[i]), cs = clamp(gsv[i]);
    total -= (yv[i] * std::log(cv) + (1.0 - yv[i]) * std::log(1.0 - cv)) / k;
    total -= (yv[i] * std::log(cs) + (1.0 - yv[i]) * std::log(1.0 - cs)) / k;
  }
  return make_op({1}, {total}, {gv.node(), gs.node(), y.node()},
                     [k, lo, hi](TapeNode& node) {
                       const double g = node.grad[0];
                       auto& pv = *node.parents[0];
                       auto& ps = *node.parents[1];
                       const auto& yv = node.parents[2]->value;
                       auto backprop_side = [&](TapeNode& p) {
                         if (!p.requires_grad) return;
                         p.ensure_grad();
                         for (std::size_t i = 0; i < p.value.size(); ++i) {
                           const double v = p.value[i];
                           if (v < lo || v > hi) continue;  // clamped: flat
                           p.grad[i] += g * (-(yv[i] / v - (1.0 - yv[i]) / (1.0 - v)) / k);
                         }
                       };
                       backprop_side(pv);
                       backprop_side(ps);
                     });
}

}  // namespace dualenc
