// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

namespace emostress::io {

struct DelimitedRecord {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
  bool unterminated_quote = false;
};

struct DelimitedTable {
  std::vector<std::string> header;
  std::vector<DelimitedRecord> records;
};

/// Reads a delimiter-separated file with a header row. Quoted fields follow
/// RFC 4180: embedded delimiters, doubled quotes and line breaks are allowed
/// inside quotes. A UTF-8 byte-order mark and CRLF line endings are accepted.
/// Blank lines are skipped. Throws if the stream holds no header row.
DelimitedTable read_delimited(std::istream& in, char delimiter);

/// Quotes a field when it contains the delimiter, a quote or a line break.
std::string quote_field(const std::string& field, char delimiter);

}  // namespace emostress::io
