#pragma once

#include <vector>

#include "dualenc/tensor.hpp"

namespace dualenc {

// Differentiable primitives. All ops validate shapes and throw
// std::invalid_argument naming the offending shapes.

// elementwise
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);

// reductions / structure
Tensor sum(const Tensor& a);                         // -> scalar
Tensor concat(const std::vector<Tensor>& parts);     // 1-d tensors -> 1-d
Tensor stack_rows(const std::vector<Tensor>& rows);  // k vectors {D} -> {k, D}
Tensor row(const Tensor& x, int index);              // {n, D} -> {D}

// y = W x + b with W {out, in}; x is {in} or a batch {B, in}; b is {out}.
Tensor matvec_affine(const Tensor& x, const Tensor& w, const Tensor& b);

// columnwise mean / max over the rows of an {n, D} map
Tensor pool_mean(const Tensor& x);
Tensor pool_max(const Tensor& x);

// gathers rows of the embedding matrix {V, d} for a list of indices -> {m, d}
Tensor embedding_rows(const Tensor& table, const std::vector<int>& indices);

// similarity matrices for a batch of row vectors; entry (i, j) pairs row i of
// the first argument with row j of the second
Tensor cosine_matrix(const Tensor& a, const Tensor& b);   // {Ba,d} x {Bb,d} -> {Ba,Bb}
Tensor jaccard_matrix(const Tensor& a, const Tensor& b);  // entries must be >= 0

// Hinge ranking loss over a square similarity matrix whose diagonal holds the
// relevant pairs. Negatives are the per-row / per-column off-diagonal maxima
// (ties resolved to the lowest index). Summed over the batch.
Tensor triplet_loss_hardest(const Tensor& s, double margin);

// Binary cross-entropy against shared soft targets, averaged over the label
// dimension and summed over the batch; predictions clamped to
// [clamp_eps, 1-clamp_eps]. Accepts {K} vectors or {B, K} batches.
Tensor bce_concept_loss(const Tensor& gv, const Tensor& gs, const Tensor& y,
                        double clamp_eps = 1e-7);

}  // namespace dualenc
