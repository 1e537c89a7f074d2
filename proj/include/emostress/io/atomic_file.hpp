// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>

namespace emostress::io {

/// Writes to a sibling temp file and renames it over the target, so readers
/// never observe a partially written file.
void write_file_atomically(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

/// Append-only line-delimited log. Each append is a single write of a full
/// line under a process-wide lock.
class AppendLog {
 public:
  explicit AppendLog(std::filesystem::path path);
  void append(std::string_view line);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mutex_;
};

}  // namespace emostress::io
