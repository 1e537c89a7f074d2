// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#include "emostress/io/safetensors.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "emostress/io/atomic_file.hpp"

namespace emostress::io {

static_assert(std::endian::native == std::endian::little,
              "safetensors payloads are little-endian; big-endian hosts are unsupported");

namespace {

using nlohmann::json;

double half_to_double(std::uint16_t h) {
  const std::uint32_t sign = (h >> 15) & 1u;
  const std::uint32_t exp = (h >> 10) & 0x1fu;
  const std::uint32_t mant = h & 0x3ffu;
  double v;
  if (exp == 0) {
    v = std::ldexp(static_cast<double>(mant), -24);
  } else if (exp == 31) {
    v = mant ? std::numeric_limits<double>::quiet_NaN() : std::numeric_limits<double>::infinity();
  } else {
    v = std::ldexp(static_cast<double>(mant | 0x400u), static_cast<int>(exp) - 25);
  }
  return sign ? -v : v;
}

double bf16_to_double(std::uint16_t h) {
  const std::uint32_t bits = static_cast<std::uint32_t>(h) << 16;
  return static_cast<double>(std::bit_cast<float>(bits));
}

template <typename Raw>
void convert(const char* src, std::size_t count, std::vector<double>& out,
             const std::function<double(Raw)>& f) {
  out.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    Raw r;
    std::memcpy(&r, src + i * sizeof(Raw), sizeof(Raw));
    out[i] = f(r);
  }
}

}  // namespace

std::size_t Tensor::element_count() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

TensorFile read_safetensors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open tensor file: " + path.string());
  std::uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  const auto file_size = std::filesystem::file_size(path);
  if (!in || header_len == 0 || header_len > file_size - 8)
    throw std::runtime_error("tensor file header is truncated: " + path.string());
  std::string header(header_len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_len));
  json meta;
  try {
    meta = json::parse(header);
  } catch (const json::exception& e) {
    throw std::runtime_error("tensor file header is not valid JSON (" + path.string() +
                             "): " + e.what());
  }
  const std::size_t data_size = file_size - 8 - header_len;
  std::string data(data_size, '\0');
  in.read(data.data(), static_cast<std::streamsize>(data_size));
  if (!in) throw std::runtime_error("tensor file payload is truncated: " + path.string());

  TensorFile file;
  for (const auto& [name, entry] : meta.items()) {
    if (name == "__metadata__") {
      for (const auto& [k, v] : entry.items()) file.metadata[k] = v.get<std::string>();
      continue;
    }
    Tensor t;
    t.shape = entry.at("shape").get<std::vector<std::size_t>>();
    const auto offsets = entry.at("data_offsets").get<std::vector<std::size_t>>();
    const auto dtype = entry.at("dtype").get<std::string>();
    if (offsets.size() != 2 || offsets[0] > offsets[1] || offsets[1] > data_size)
      throw std::runtime_error("tensor '" + name + "' has invalid data offsets");
    const std::size_t count = t.element_count();
    const std::size_t bytes = offsets[1] - offsets[0];
    const char* src = data.data() + offsets[0];
    auto expect = [&](std::size_t width) {
      if (bytes != count * width)
        throw std::runtime_error("tensor '" + name + "' byte size does not match its shape");
    };
    if (dtype == "F64") {
      expect(8);
      convert<double>(src, count, t.values, [](double v) { return v; });
    } else if (dtype == "F32") {
      expect(4);
      convert<float>(src, count, t.values, [](float v) { return static_cast<double>(v); });
    } else if (dtype == "F16") {
      expect(2);
      convert<std::uint16_t>(src, count, t.values, half_to_double);
    } else if (dtype == "BF16") {
      expect(2);
      convert<std::uint16_t>(src, count, t.values, bf16_to_double);
    } else if (dtype == "I64") {
      expect(8);
      convert<std::int64_t>(src, count, t.values,
                            [](std::int64_t v) { return static_cast<double>(v); });
    } else {
      throw std::runtime_error("tensor '" + name + "' has unsupported dtype " + dtype);
    }
    file.tensors.emplace(name, std::move(t));
  }
  return file;
}

void write_safetensors(const std::filesystem::path& path, const TensorFile& file) {
  json meta = json::object();
  if (!file.metadata.empty()) meta["__metadata__"] = file.metadata;
  std::size_t offset = 0;
  for (const auto& [name, t] : file.tensors) {
    if (t.values.size() != t.element_count())
      throw std::invalid_argument("tensor '" + name + "' values do not match its shape");
    const std::size_t bytes = t.values.size() * sizeof(double);
    meta[name] = {{"dtype", "F64"}, {"shape", t.shape}, {"data_offsets", {offset, offset + bytes}}};
    offset += bytes;
  }
  std::string header = meta.dump();
  header.append((8 - header.size() % 8) % 8, ' ');
  std::string blob;
  blob.reserve(8 + header.size() + offset);
  const std::uint64_t len = header.size();
  blob.append(reinterpret_cast<const char*>(&len), sizeof(len));
  blob += header;
  for (const auto& [name, t] : file.tensors)
    blob.append(reinterpret_cast<const char*>(t.values.data()), t.values.size() * sizeof(double));
  write_file_atomically(path, blob);
}

}  // namespace emostress::io
