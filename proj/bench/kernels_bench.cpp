// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

// Serial reference kernels against their OpenMP counterparts, on shapes
// close to what a base-size encoder sees per batch.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "emostress/kernels/kernels.hpp"

namespace k = emostress::kernels;
using emostress::Matrix;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = dist(gen);
  return m;
}

template <bool Parallel>
void BM_matmul_nt(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, 768, 1), b = random_matrix(768, 768, 2);
  Matrix c(n, 768);
  for (auto _ : state) {
    if constexpr (Parallel) k::matmul_nt(a, b, c);
    else k::reference::matmul_nt(a, b, c);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * 768 * 768));
}

template <bool Parallel>
void BM_layer_norm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix x = random_matrix(n, 768, 3);
  const std::vector<double> gamma(768, 1.0), beta(768, 0.0);
  Matrix y;
  std::vector<double> mean, rstd;
  for (auto _ : state) {
    if constexpr (Parallel) k::layer_norm_forward(x, gamma, beta, 1e-5, y, mean, rstd);
    else k::reference::layer_norm_forward(x, gamma, beta, 1e-5, y, mean, rstd);
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Parallel>
void BM_attention(benchmark::State& state) {
  const auto t = static_cast<std::size_t>(state.range(0));
  constexpr std::size_t batch = 8, heads = 12, hidden = 768;
  const Matrix q = random_matrix(batch * t, hidden, 4), kk = random_matrix(batch * t, hidden, 5),
               v = random_matrix(batch * t, hidden, 6);
  std::vector<std::size_t> offsets;
  for (std::size_t b = 0; b <= batch; ++b) offsets.push_back(b * t);
  std::vector<Matrix> probs;
  const std::vector<Matrix> no_dropout;
  Matrix context(batch * t, hidden);
  for (auto _ : state) {
    if constexpr (Parallel) k::attention_forward(q, kk, v, offsets, heads, probs, no_dropout, context);
    else k::reference::attention_forward(q, kk, v, offsets, heads, probs, no_dropout, context);
    benchmark::DoNotOptimize(context.data());
  }
}

}  // namespace

BENCHMARK(BM_matmul_nt<false>)->Name("matmul_nt/reference")->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_matmul_nt<true>)->Name("matmul_nt/parallel")->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_layer_norm<false>)->Name("layer_norm/reference")->Arg(4096)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_layer_norm<true>)->Name("layer_norm/parallel")->Arg(4096)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_attention<false>)->Name("attention/reference")->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_attention<true>)->Name("attention/parallel")->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
