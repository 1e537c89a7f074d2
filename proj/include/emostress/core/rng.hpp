// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>

namespace emostress {

/// Independent random streams derived from one run seed. Each consumer owns
/// its own stream so that, e.g., changing the dropout rate never perturbs the
/// shuffle order.
enum class RngStream : std::uint64_t {
  Init = 1,
  Shuffle = 2,
  Dropout = 3,
  Tuner = 4,
  Sampling = 5,
};

/// Portable wrapper over mt19937_64. All draws are derived from raw engine
/// output so the sequence depends only on the seed, not on the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, RngStream stream = RngStream::Init) { reseed(seed, stream); }

  void reseed(std::uint64_t seed, RngStream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), 0x5eedu};
    engine_.seed(seq);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (cosine branch only, no cached state).
  double normal(double mean = 0.0, double stddev = 1.0);

  /// Uniform integer in [0, n), rejection sampled.
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::string serialize() const;
  void deserialize(const std::string& state);

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace emostress
