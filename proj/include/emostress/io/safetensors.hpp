// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace emostress::io {

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  std::size_t element_count() const;
};

/// In-memory image of a safetensors container. Reading accepts F64, F32,
/// F16 and BF16 payloads (converted to double); writing always emits F64 so
/// weights round-trip bit-exactly.
struct TensorFile {
  std::map<std::string, Tensor> tensors;
  std::map<std::string, std::string> metadata;
};

TensorFile read_safetensors(const std::filesystem::path& path);
void write_safetensors(const std::filesystem::path& path, const TensorFile& file);

}  // namespace emostress::io
