// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#include "emostress/nn.hpp"

#include <stdexcept>

#include "emostress/core/hash.hpp"
#include "emostress/kernels/kernels.hpp"

namespace emostress {

void hash_parameter(Sha256& h, std::string_view name, const Matrix& value) {
  h.update(name);
  const std::size_t shape[2] = {value.rows(), value.cols()};
  h.update_values(std::span<const std::size_t>(shape));
  h.update_values(value.values());
}

std::string fingerprint(const ConstParameterList& params) {
  Sha256 h;
  for (const Parameter* p : params) hash_parameter(h, p->name, p->value);
  return h.hex();
}

std::size_t element_count(const ConstParameterList& params) {
  std::size_t n = 0;
  for (const Parameter* p : params) n += p->value.size();
  return n;
}

Linear::Linear(const std::string& prefix, std::size_t in, std::size_t out)
    : weight(prefix + ".weight", out, in), bias(prefix + ".bias", 1, out) {}

void Linear::forward(const Matrix& x, Matrix& y) const {
  if (x.cols() != in_features())
    throw std::invalid_argument(weight.name + ": input width " + std::to_string(x.cols()) +
                                " != " + std::to_string(in_features()));
  kernels::matmul_nt(x, weight.value, y);
  kernels::add_row_bias(y, bias.value.values());
}

void Linear::backward(const Matrix& x, const Matrix& dy, Matrix* dx) {
  kernels::matmul_tn(dy, x, weight.grad, true);
  kernels::column_sums(dy, bias.grad.values(), true);
  if (dx) kernels::matmul_nn(dy, weight.value, *dx);
}

void Linear::init_normal(Rng& rng, double stddev) {
  for (double& w : weight.value.values()) w = rng.normal(0.0, stddev);
  bias.value.fill(0.0);
}

LayerNorm::LayerNorm(const std::string& prefix, std::size_t width, double eps_)
    : weight(prefix + ".weight", 1, width), bias(prefix + ".bias", 1, width), eps(eps_) {
  reset();
}

void LayerNorm::forward(const Matrix& x, Matrix& y, Cache& cache) const {
  kernels::layer_norm_forward(x, weight.value.values(), bias.value.values(), eps, y, cache.mean,
                              cache.rstd);
}

void LayerNorm::backward(const Matrix& x, const Matrix& dy, const Cache& cache, Matrix& dx) {
  kernels::layer_norm_backward(x, dy, weight.value.values(), cache.mean, cache.rstd, dx,
                               weight.grad.values(), bias.grad.values());
}

void LayerNorm::reset() {
  weight.value.fill(1.0);
  bias.value.fill(0.0);
}

Matrix make_dropout_mask(std::size_t rows, std::size_t cols, double p, Rng* rng) {
  if (rng == nullptr || p <= 0.0) return {};
  if (p > 1.0) throw std::invalid_argument("dropout probability above 1");
  Matrix mask(rows, cols);
  if (p >= 1.0) return mask;  // everything dropped
  const double keep = 1.0 / (1.0 - p);
  for (double& m : mask.values()) m = rng->uniform() >= p ? keep : 0.0;
  return mask;
}

void apply_mask(Matrix& x, const Matrix& mask) {
  if (mask.empty()) return;
  double* px = x.data();
  const double* pm = mask.data();
  for (std::size_t i = 0; i < x.size(); ++i) px[i] *= pm[i];
}

}  // namespace emostress
