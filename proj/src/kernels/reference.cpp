// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

// Serial reference kernels. Deliberately naive: these are the ground truth
// the OpenMP kernels are tested and benchmarked against.

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "emostress/kernels/kernels.hpp"

namespace emostress::kernels::reference {

namespace {

void prepare(Matrix& c, std::size_t rows, std::size_t cols, bool accumulate) {
  if (accumulate) {
    if (c.rows() != rows || c.cols() != cols)
      throw std::invalid_argument("matmul: accumulate target has wrong shape");
  } else {
    c.resize(rows, cols);
  }
}

}  // namespace

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  if (a.cols() != b.cols()) throw std::invalid_argument("matmul_nt: inner dimension mismatch");
  prepare(c, a.rows(), b.rows(), accumulate);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) s += a(i, p) * b(j, p);
      c(i, j) += s;
    }
}

void matmul_nn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul_nn: inner dimension mismatch");
  prepare(c, a.rows(), b.cols(), accumulate);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) s += a(i, p) * b(p, j);
      c(i, j) += s;
    }
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  if (a.rows() != b.rows()) throw std::invalid_argument("matmul_tn: inner dimension mismatch");
  prepare(c, a.cols(), b.cols(), accumulate);
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.rows(); ++p) s += a(p, i) * b(p, j);
      c(i, j) += s;
    }
}

void add_row_bias(Matrix& y, std::span<const double> bias) {
  if (bias.size() != y.cols()) throw std::invalid_argument("add_row_bias: width mismatch");
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = 0; j < y.cols(); ++j) y(i, j) += bias[j];
}

void column_sums(const Matrix& x, std::span<double> out, bool accumulate) {
  if (out.size() != x.cols()) throw std::invalid_argument("column_sums: width mismatch");
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) s += x(i, j);
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
  for (std::size_t i = 0; i < n; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < h; ++j) mu += x(i, j);
    mu /= static_cast<double>(h);
    double var = 0.0;
    for (std::size_t j = 0; j < h; ++j) var += (x(i, j) - mu) * (x(i, j) - mu);
    var /= static_cast<double>(h);
    const double r = 1.0 / std::sqrt(var + eps);
    mean[i] = mu;
    rstd[i] = r;
    for (std::size_t j = 0; j < h; ++j) y(i, j) = (x(i, j) - mu) * r * gamma[j] + beta[j];
  }
}

void layer_norm_backward(const Matrix& x, const Matrix& dy, std::span<const double> gamma,
                         std::span<const double> mean, std::span<const double> rstd, Matrix& dx,
                         std::span<double> dgamma, std::span<double> dbeta) {
  const std::size_t n = x.rows(), h = x.cols();
  dx.resize(n, h);
  for (std::size_t i = 0; i < n; ++i) {
    double mean_g = 0.0, mean_gx = 0.0;
    for (std::size_t j = 0; j < h; ++j) {
      const double xhat = (x(i, j) - mean[i]) * rstd[i];
      const double g = dy(i, j) * gamma[j];
      mean_g += g;
      mean_gx += g * xhat;
      dgamma[j] += dy(i, j) * xhat;
      dbeta[j] += dy(i, j);
    }
    mean_g /= static_cast<double>(h);
    mean_gx /= static_cast<double>(h);
    for (std::size_t j = 0; j < h; ++j) {
      const double xhat = (x(i, j) - mean[i]) * rstd[i];
      dx(i, j) = rstd[i] * (dy(i, j) * gamma[j] - mean_g - xhat * mean_gx);
    }
  }
}

void gelu_forward(const Matrix& x, Matrix& y) {
  y.resize(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x.data()[i];
    y.data()[i] = 0.5 * v * (1.0 + std::erf(v / std::numbers::sqrt2));
  }
}

void gelu_backward(const Matrix& x, const Matrix& dy, Matrix& dx) {
  dx.resize(x.rows(), x.cols());
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x.data()[i];
    const double cdf = 0.5 * (1.0 + std::erf(v / std::numbers::sqrt2));
    const double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
    dx.data()[i] = dy.data()[i] * (cdf + v * pdf);
  }
}

void softmax_rows(Matrix& x) {
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double mx = -INFINITY;
    for (std::size_t j = 0; j < x.cols(); ++j) mx = std::max(mx, x(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
      x(i, j) = std::exp(x(i, j) - mx);
      z += x(i, j);
    }
    for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) /= z;
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
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t start = offsets[b], len = offsets[b + 1] - offsets[b];
    for (std::size_t h = 0; h < heads; ++h) {
      Matrix& p = probs[b * heads + h];
      p.resize(len, len);
      for (std::size_t i = 0; i < len; ++i)
        for (std::size_t j = 0; j < len; ++j) {
          double s = 0.0;
          for (std::size_t c = 0; c < d; ++c) s += q(start + i, h * d + c) * k(start + j, h * d + c);
          p(i, j) = s * scale;
        }
      softmax_rows(p);
      for (std::size_t i = 0; i < len; ++i)
        for (std::size_t c = 0; c < d; ++c) {
          double s = 0.0;
          for (std::size_t j = 0; j < len; ++j) {
            const double w = keep_masks.empty() ? p(i, j) : p(i, j) * keep_masks[b * heads + h](i, j);
            s += w * v(start + j, h * d + c);
          }
          context(start + i, h * d + c) = s;
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
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t start = offsets[b], len = offsets[b + 1] - offsets[b];
    for (std::size_t h = 0; h < heads; ++h) {
      const Matrix& p = probs[b * heads + h];
      const Matrix* mask = keep_masks.empty() ? nullptr : &keep_masks[b * heads + h];
      Matrix dp(len, len);
      for (std::size_t i = 0; i < len; ++i)
        for (std::size_t j = 0; j < len; ++j) {
          double s = 0.0;
          for (std::size_t c = 0; c < d; ++c)
            s += dcontext(start + i, h * d + c) * v(start + j, h * d + c);
          const double m = mask ? (*mask)(i, j) : 1.0;
          dp(i, j) = s * m;
          for (std::size_t c = 0; c < d; ++c)
            dv(start + j, h * d + c) += p(i, j) * m * dcontext(start + i, h * d + c);
        }
      for (std::size_t i = 0; i < len; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < len; ++j) dot += p(i, j) * dp(i, j);
        for (std::size_t j = 0; j < len; ++j) {
          const double ds = p(i, j) * (dp(i, j) - dot) * scale;
          for (std::size_t c = 0; c < d; ++c) {
            dq(start + i, h * d + c) += ds * k(start + j, h * d + c);
            dk(start + j, h * d + c) += ds * q(start + i, h * d + c);
          }
        }
      }
    }
  }
}

}  // namespace emostress::kernels::reference
