#pragma once

// Minimal tape-free reverse-mode differentiation over dense matrices.
//
// Every op allocates a Node holding its value and shared references to its
// inputs. `backward` walks the graph reachable from a scalar loss in reverse
// topological order; nodes that do not depend on any parameter carry no
// backward rule and are skipped.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "matrix.hpp"

namespace s2gsl {

struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
  Matrix value;
  Matrix grad;  // empty until first accumulated into
  std::vector<Var> parents;
  std::function<void(Node&)> backward_fn;
  bool requires_grad = false;

  void accumulate(const Matrix& g);
  void zero_grad();
};

// Trainable leaf.
Var parameter(Matrix value);
Var constant(Matrix value);

// Populates `grad` on every node reachable from `loss`. Leaf gradients
// accumulate across calls; intermediate gradients are reset each call.
void backward(const Var& loss);

namespace ad {

Var matmul(const Var& a, const Var& b);
// a * b^T
Var matmul_nt(const Var& a, const Var& b);
Var transpose(const Var& a);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
// Elementwise product with a constant matrix of the same shape.
Var mul_const(const Var& a, const Matrix& c);
// scale * a + shift
Var affine(const Var& a, double scale, double shift = 0.0);
// a (any shape) times a 1x1 node.
Var scale_by(const Var& a, const Var& s);
// x (n x c) plus a 1 x c bias broadcast over rows.
Var add_row_bias(const Var& x, const Var& bias);

Var relu(const Var& a);
Var sigmoid(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
// Values outside [lo, hi] are clipped; gradient is zero where clipped.
Var clamp(const Var& a, double lo, double hi);

// Row-wise softmax of (x + additive_mask). Mask entries are 0 or the
// kMaskSentinel; pass nullptr for no mask.
Var softmax_rows(const Var& x, const Matrix* additive_mask = nullptr);

Var sum(const Var& a);
Var mean(const Var& a);
Var concat_cols(std::span<const Var> parts);
Var slice_cols(const Var& a, std::size_t c0, std::size_t c1);
// Mean over rows [r0, r1], inclusive; returns 1 x cols.
Var mean_rows(const Var& a, std::size_t r0, std::size_t r1);
Var broadcast_rows(const Var& row, std::size_t n);
Var col_sums(const Var& a);
Var diag_to_row(const Var& a);
Var row_to_diag(const Var& row);
Var replace_row(const Var& a, std::size_t r, const Var& row);
Var pick(const Var& a, std::size_t r, std::size_t c);

// Per-row normalization to zero mean / unit variance, then gain and offset
// (both 1 x cols).
Var layer_norm_rows(const Var& x, const Var& gain, const Var& offset, double eps);

Var inverse(const Var& a, double pivot_tol = 1e-300);

// Rows of `table` selected by `ids`. With `zero_id0`, id 0 yields a constant
// zero row and id k > 0 reads table row k - 1.
Var gather_rows(const Var& table, std::span<const std::size_t> ids, bool zero_id0);
// Column `col` of an (n*n) x k matrix reshaped to n x n (row-major cells).
Var column_as_square(const Var& a, std::size_t col, std::size_t n);

// Mean over cells of BCE(sigmoid(logits), targets), in the softplus form.
Var bce_logits_mean(const Var& logits, const Matrix& targets);
// -sum_i [t_i ln p_i + (1 - t_i) ln(1 - p_i)] with p clamped to [eps, 1 - eps].
Var bce_prob_sum(const Var& probs, const Matrix& targets, double eps);
// -ln max(y(0, label), eps) for a 1 x C probability row.
Var neg_log_pick(const Var& probs, std::size_t label, double eps);

}  // namespace ad

inline constexpr double kMaskSentinel = -1e30;

}  // namespace s2gsl
