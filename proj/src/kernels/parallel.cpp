// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "emostress/kernels/kernels.hpp"

namespace emostress::kernels {

namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1u << 14;

void prepare(Matrix& c, std::size_t rows, std::size_t cols, bool accumulate) {
  if (accumulate) {
    if (c.rows() != rows || c.cols() != cols)
      throw std::invalid_argument("matmul: accumulate target has wrong shape");
  } else {
    c.resize(rows, cols);
  }
}

long as_long(std::size_t n) { return static_cast<long>(n); }

}  // namespace

int thread_count() { return omp_get_max_threads(); }

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  if (a.cols() != b.cols()) throw std::invalid_argument("matmul_nt: inner dimension mismatch");
  prepare(c, a.rows(), b.rows(), accumulate);
  const std::size_t m = a.rows(), n = b.rows(), k = a.cols();
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
#pragma omp parallel for schedule(static) if (m * n * k > kParallelWork)
  for (long i = 0; i < as_long(m); ++i) {
    const double* ai = pa + i * k;
    double* ci = pc + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = pb + j * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
      ci[j] += s;
    }
  }
}

void matmul_nn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul_nn: inner dimension mismatch");
  prepare(c, a.rows(), b.cols(), accumulate);
  const std::size_t m = a.rows(), n = b.cols(), k = a.cols();
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
#pragma omp parallel for schedule(static) if (m * n * k > kParallelWork)
  for (long i = 0; i < as_long(m); ++i) {
    double* ci = pc + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = pa[i * k + p];
      const double* bp = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  if (a.rows() != b.rows()) throw std::invalid_argument("matmul_tn: inner dimension mismatch");
  prepare(c, a.cols(), b.cols(), accumulate);
  const std::size_t m = a.cols(), n = b.cols(), k = a.rows();
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
#pragma omp parallel for schedule(static) if (m * n * k > kParallelWork)
  for (long i = 0; i < as_long(m); ++i) {
    double* ci = pc + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double api = pa[p * m + i];
      if (api == 0.0) continue;
      const double* bp = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += api * bp[j];
    }
  }
}

void add_row_bias(Matrix& y, std::span<const double> bias) {
  if (bias.size() != y.cols()) throw std::invalid_argument("add_row_bias: width mismatch");
  const std::size_t n = y.cols();
#pragma omp parallel for schedule(static) if (y.size() > kParallelWork)
  for (long i = 0; i < as_long(y.rows()); ++i) {
    double* yi = y.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) yi[j] += bias[j];
  }
}

void column_sums(const Matrix& x, std::span<double> out, bool accumulate) {
  if (out.size() != x.cols()) throw std::invalid_argument("column_sums: width mismatch");
  const std::size_t n = x.cols();
#pragma omp parallel for schedule(static) if (x.size() > kParallelWork)
  for (long j = 0; j < as_long(n); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) s += x.data()[i * n + j];
    out[j] = accumulate ? out[j] + s : s;
  }
}

void layer_norm_forward(const Matrix& x, std::span<const double> gamma,
                        std::span<const double> beta, double eps, Matrix& y,
                        std::vector<double>& mean, std::vector<double>& rstd) {
  const std::size_t n = x.rows(), h = x.cols();
  if (gamma.size() != h || beta.size() != h)
    throw std::invalid_argument("layer_norm_forward: parameter width mismatch");
  y.resize(n, h);
  mean.assign(n, 0.0);
  rstd.assign(n, 0.0);
#pragma omp parallel for schedule(static) if (x.size() > kParallelWork)
  for (long i = 0; i < as_long(n); ++i) {
    const double* xi = x.data() + i * h;
    double* yi = y.data() + i * h;
    double mu = 0.0;
    for (std::size_t j = 0; j < h; ++j) mu += xi[j];
    mu /= static_cast<double>(h);
    double var = 0.0;
    for (std::size_t j = 0; j < h; ++j) var += (xi[j] - mu) * (xi[j] - mu);
    var /= static_cast<double>(h);
    const double r = 1.0 / std::sqrt(var + eps);
    mean[i] = mu;
    rstd[i] = r;
    for (std::size_t j = 0; j < h; ++j) yi[j] = (xi[j] - mu) * r * gamma[j] + beta[j];
  }
}

void layer_norm_backward(const Matrix& x, const Matrix& dy, std::span<const double> gamma,
                         std::span<const double> mean, std::span<const double> rstd, Matrix& dx,
                         std::span<double> dgamma, std::span<double> dbeta) {
  const std::size_t n = x.rows(), h = x.cols();
  dx.resize(n, h);
#pragma omp parallel for schedule(static) if (x.size() > kParallelWork)
  for (long i = 0; i < as_long(n); ++i) {
    const double* xi = x.data() + i * h;
    const double* gi = dy.data() + i * h;
    double* di = dx.data() + i * h;
    double mean_g = 0.0, mean_gx = 0.0;
    for (std::size_t j = 0; j < h; ++j) {
      const double xhat = (xi[j] - mean[i]) * rstd[i];
      const double g = gi[j] * gamma[j];
      mean_g += g;
      mean_gx += g * xhat;
    }
    mean_g /= static_cast<double>(h);
    mean_gx /= static_cast<double>(h);
    for (std::size_t j = 0; j < h; ++j) {
      const double xhat = (xi[j] - mean[i]) * rstd[i];
      di[j] = rstd[i] * (gi[j] * gamma[j] - mean_g - xhat * mean_gx);
    }
  }
  // Parameter gradients reduce over rows; split by column to stay deterministic.
#pragma omp parallel for schedule(static) if (x.size() > kParallelWork)
  for (long j = 0; j < as_long(h); ++j) {
    double sg = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = dy.data()[i * h + j];
      sg += g * (x.data()[i * h + j] - mean[i]) * rstd[i];
      sb += g;
    }
    dgamma[j] += sg;
    dbeta[j] += sb;
  }
}

void gelu_forward(const Matrix& x, Matrix& y) {
  y.resize(x.rows(), x.cols());
  const double* px = x.data();
  double* py = y.data();
#pragma omp parallel for schedule(static) if (x.size() > kParallelWork)
  for (long i = 0; i < as_long(x.size()); ++i)
    py[i] = 0.5 * px[i] * (1.0 + std::erf(px[i] / std::numbers::sqrt2));
}

void gelu_backward(const Matrix& x, const Matrix& dy, Matrix& dx) {
  dx.resize(x.rows(), x.cols());
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  const double* px = x.data();
  const double* pg = dy.data();
  double* pd = dx.data();
#pragma omp parallel for schedule(static) if (x.size() > kParallelWork)
  for (long i = 0; i < as_long(x.size()); ++i) {
    const double v = px[i];
    const double cdf = 0.5 * (1.0 + std::erf(v / std::numbers::sqrt2));
    pd[i] = pg[i] * (cdf + v * inv_sqrt_2pi * std::exp(-0.5 * v * v));
  }
}

void softmax_rows(Matrix& x) {
  const std::size_t n = x.cols();
#pragma omp parallel for schedule(static) if (x.size() > kParallelWork)
  for (long i = 0; i < as_long(x.rows()); ++i) {
    double* xi = x.data() + i * n;
    const double mx = *std::max_element(xi, xi + n);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      xi[j] = std::exp(xi[j] - mx);
      z += xi[j];
    }
    const double inv = 1.0 / z;
    for (std::size_t j = 0; j < n; ++j) xi[j] *= inv;
  }
}

void attention_forward(const Matrix& q, const Matrix& k, const Matrix& v, Offsets offsets,
                       std::size_t heads, std::vector<Matrix>& probs,
                       const std::vector<Matrix>& keep_masks, Matrix& context) {
  const std::size_t width = q.cols();
  if (width % heads != 0) throw std::invalid_argument("attention: width not divisible by heads");
  const std::size_t d = width / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  const std::size_t batch = offsets.size() - 1;
  probs.assign(batch * heads, Matrix());
  context.resize(q.rows(), width);
  const std::size_t pairs = batch * heads;
#pragma omp parallel for schedule(dynamic) if (q.size() * d > kParallelWork)
  for (long pair = 0; pair < as_long(pairs); ++pair) {
    const std::size_t b = static_cast<std::size_t>(pair) / heads;
    const std::size_t h = static_cast<std::size_t>(pair) % heads;
    const std::size_t start = offsets[b], len = offsets[b + 1] - offsets[b];
    Matrix& p = probs[static_cast<std::size_t>(pair)];
    p.resize(len, len);
    for (std::size_t i = 0; i < len; ++i) {
      const double* qi = q.data() + (start + i) * width + h * d;
      double* pi = p.data() + i * len;
      double mx = -INFINITY;
      for (std::size_t j = 0; j < len; ++j) {
        const double* kj = k.data() + (start + j) * width + h * d;
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) s += qi[c] * kj[c];
        pi[j] = s * scale;
        mx = std::max(mx, pi[j]);
      }
      double z = 0.0;
      for (std::size_t j = 0; j < len; ++j) {
        pi[j] = std::exp(pi[j] - mx);
        z += pi[j];
      }
      for (std::size_t j = 0; j < len; ++j) pi[j] /= z;
      const double* mi = keep_masks.empty() ? nullptr : keep_masks[static_cast<std::size_t>(pair)].data() + i * len;
      double* ci = context.data() + (start + i) * width + h * d;
      std::fill(ci, ci + d, 0.0);
      for (std::size_t j = 0; j < len; ++j) {
        const double w = mi ? pi[j] * mi[j] : pi[j];
        const double* vj = v.data() + (start + j) * width + h * d;
        for (std::size_t c = 0; c < d; ++c) ci[c] += w * vj[c];
      }
    }
  }
}

void attention_backward(const Matrix& q, const Matrix& k, const Matrix& v, Offsets offsets,
                        std::size_t heads, const std::vector<Matrix>& probs,
                        const std::vector<Matrix>& keep_masks, const Matrix& dcontext, Matrix& dq,
                        Matrix& dk, Matrix& dv) {
  const std::size_t width = q.cols();
  const std::size_t d = width / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  const std::size_t batch = offsets.size() - 1;
  dq.resize(q.rows(), width);
  dk.resize(k.rows(), width);
  dv.resize(v.rows(), width);
  const std::size_t pairs = batch * heads;
#pragma omp parallel for schedule(dynamic) if (q.size() * d > kParallelWork)
  for (long pair = 0; pair < as_long(pairs); ++pair) {
    const std::size_t b = static_cast<std::size_t>(pair) / heads;
    const std::size_t h = static_cast<std::size_t>(pair) % heads;
    const std::size_t start = offsets[b], len = offsets[b + 1] - offsets[b];
    const Matrix& p = probs[static_cast<std::size_t>(pair)];
    const Matrix* mask = keep_masks.empty() ? nullptr : &keep_masks[static_cast<std::size_t>(pair)];
    std::vector<double> dp(len);
    for (std::size_t i = 0; i < len; ++i) {
      const double* gi = dcontext.data() + (start + i) * width + h * d;
      const double* pi = p.data() + i * len;
      const double* mi = mask ? mask->data() + i * len : nullptr;
      double dot = 0.0;
      for (std::size_t j = 0; j < len; ++j) {
        const double* vj = v.data() + (start + j) * width + h * d;
        double* dvj = dv.data() + (start + j) * width + h * d;
        const double m = mi ? mi[j] : 1.0;
        const double w = pi[j] * m;
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          s += gi[c] * vj[c];
          dvj[c] += w * gi[c];
        }
        dp[j] = s * m;
        dot += pi[j] * dp[j];
      }
      const double* qi = q.data() + (start + i) * width + h * d;
      double* dqi = dq.data() + (start + i) * width + h * d;
      for (std::size_t j = 0; j < len; ++j) {
        const double ds = pi[j] * (dp[j] - dot) * scale;
        const double* kj = k.data() + (start + j) * width + h * d;
        double* dkj = dk.data() + (start + j) * width + h * d;
        for (std::size_t c = 0; c < d; ++c) {
          dqi[c] += ds * kj[c];
          dkj[c] += ds * qi[c];
        }
      }
    }
  }
}

}  // namespace emostress::kernels
