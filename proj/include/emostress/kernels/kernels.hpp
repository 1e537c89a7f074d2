// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "emostress/core/matrix.hpp"

/// Numeric kernels behind the transformer encoder.
///
/// Two implementations share these signatures:
///   - emostress::kernels            OpenMP-parallel, used by the library
///   - emostress::kernels::reference plain serial loops, kept for testing
///
/// Parallel kernels split work over output rows (or columns for reductions),
/// so every output element is summed in a fixed order. Results therefore do
/// not depend on the thread count, which the determinism contract of the
/// trainer relies on.
namespace emostress::kernels {

/// Per-sequence layout of a packed batch: sequence b owns rows
/// [offsets[b], offsets[b+1]) of every activation matrix.
using Offsets = std::span<const std::size_t>;

#define EMOSTRESS_KERNEL_DECLS                                                                    \
  /* C = A * B^T (+C). A: m x k, B: n x k, C: m x n. */                                          \
  void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);           \
  /* C = A * B (+C). A: m x k, B: k x n. */                                                       \
  void matmul_nn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);           \
  /* C = A^T * B (+C). A: k x m, B: k x n. */                                                     \
  void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);           \
  void add_row_bias(Matrix& y, std::span<const double> bias);                                     \
  /* out[j] (+)= sum_i x(i, j) */                                                                 \
  void column_sums(const Matrix& x, std::span<double> out, bool accumulate = false);              \
  void layer_norm_forward(const Matrix& x, std::span<const double> gamma,                         \
                          std::span<const double> beta, double eps, Matrix& y,                    \
                          std::vector<double>& mean, std::vector<double>& rstd);                  \
  /* dx is overwritten; dgamma and dbeta are accumulated. */                                      \
  void layer_norm_backward(const Matrix& x, const Matrix& dy, std::span<const double> gamma,      \
                           std::span<const double> mean, std::span<const double> rstd,            \
                           Matrix& dx, std::span<double> dgamma, std::span<double> dbeta);        \
  void gelu_forward(const Matrix& x, Matrix& y);                                                  \
  void gelu_backward(const Matrix& x, const Matrix& dy, Matrix& dx);                              \
  void softmax_rows(Matrix& x);                                                                   \
  /* Multi-head scaled dot-product attention over a packed batch.                                \
     q, k, v: N x H with head h in columns [h*d, (h+1)*d).                                       \
     probs receives one T x T softmax matrix per (sequence, head), index b*heads + h.            \
     keep_masks, when non-empty, holds matching inverted-dropout multipliers. */                 \
  void attention_forward(const Matrix& q, const Matrix& k, const Matrix& v, Offsets offsets,      \
                         std::size_t heads, std::vector<Matrix>& probs,                           \
                         const std::vector<Matrix>& keep_masks, Matrix& context);                 \
  void attention_backward(const Matrix& q, const Matrix& k, const Matrix& v, Offsets offsets,     \
                          std::size_t heads, const std::vector<Matrix>& probs,                    \
                          const std::vector<Matrix>& keep_masks, const Matrix& dcontext,          \
                          Matrix& dq, Matrix& dk, Matrix& dv);

EMOSTRESS_KERNEL_DECLS

namespace reference {
EMOSTRESS_KERNEL_DECLS
}  // namespace reference

#undef EMOSTRESS_KERNEL_DECLS

/// Number of OpenMP threads the parallel kernels will use.
int thread_count();

}  // namespace emostress::kernels
