// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "emostress/core/matrix.hpp"
#include "emostress/core/rng.hpp"

namespace emostress {

/// A trainable tensor with its accumulated gradient. Vectors (biases, norm
/// scales) are stored as 1 x n matrices.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, std::size_t rows, std::size_t cols)
      : name(std::move(n)), value(rows, cols), grad(rows, cols) {}

  void zero_grad() { grad.fill(0.0); }
};

using ParameterList = std::vector<Parameter*>;
using ConstParameterList = std::vector<const Parameter*>;

class Sha256;

/// Feeds one named tensor into a running fingerprint.
void hash_parameter(Sha256& h, std::string_view name, const Matrix& value);

/// SHA-256 over names, shapes and raw values, in list order.
std::string fingerprint(const ConstParameterList& params);
std::size_t element_count(const ConstParameterList& params);

/// y = x W^T + b, with W stored [out x in] like the pretrained checkpoints.
class Linear {
 public:
  Linear() = default;
  Linear(const std::string& prefix, std::size_t in, std::size_t out);

  void forward(const Matrix& x, Matrix& y) const;
  /// Accumulates weight/bias gradients; writes dx when non-null.
  void backward(const Matrix& x, const Matrix& dy, Matrix* dx);
  void init_normal(Rng& rng, double stddev);

  std::size_t in_features() const { return weight.value.cols(); }
  std::size_t out_features() const { return weight.value.rows(); }
  void collect(ParameterList& out) { out.push_back(&weight); out.push_back(&bias); }
  void collect(ConstParameterList& out) const { out.push_back(&weight); out.push_back(&bias); }

  Parameter weight;
  Parameter bias;
};

class LayerNorm {
 public:
  struct Cache {
    std::vector<double> mean;
    std::vector<double> rstd;
  };

  LayerNorm() = default;
  LayerNorm(const std::string& prefix, std::size_t width, double eps);

  void forward(const Matrix& x, Matrix& y, Cache& cache) const;
  void backward(const Matrix& x, const Matrix& dy, const Cache& cache, Matrix& dx);
  void reset();  // gamma = 1, beta = 0

  void collect(ParameterList& out) { out.push_back(&weight); out.push_back(&bias); }
  void collect(ConstParameterList& out) const { out.push_back(&weight); out.push_back(&bias); }

  Parameter weight;
  Parameter bias;
  double eps = 1e-12;
};

/// Inverted dropout. The returned mask holds 0 or 1/(1-p) per element and is
/// empty when dropout is inactive (eval mode or p == 0).
Matrix make_dropout_mask(std::size_t rows, std::size_t cols, double p, Rng* rng);
void apply_mask(Matrix& x, const Matrix& mask);

}  // namespace emostress
