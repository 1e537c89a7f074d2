// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#include "emostress/io/delimited.hpp"

#include <iterator>
#include <stdexcept>

namespace emostress::io {

namespace {

bool blank(const DelimitedRecord& r) {
  return r.fields.size() == 1 && r.fields.front().empty() && !r.unterminated_quote;
}

}  // namespace

DelimitedTable read_delimited(std::istream& in, char delimiter) {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::size_t pos = 0;
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) pos = 3;

  std::vector<DelimitedRecord> rows;
  std::size_t line = 1;
  while (pos < text.size()) {
    DelimitedRecord rec;
    rec.line = line;
    std::string field;
    bool in_quotes = false;
    bool done = false;
    while (!done) {
      if (pos >= text.size()) {
        rec.unterminated_quote = in_quotes;
        rec.fields.push_back(std::move(field));
        break;
      }
      const char c = text[pos++];
      if (in_quotes) {
        if (c == '"') {
          if (pos < text.size() && text[pos] == '"') {
            field.push_back('"');
            ++pos;
          } else {
            in_quotes = false;
          }
        } else {
          if (c == '\n') ++line;
          field.push_back(c);
        }
        continue;
      }
      if (c == '"' && field.empty()) {
        in_quotes = true;
      } else if (c == delimiter) {
        rec.fields.push_back(std::move(field));
        field.clear();
      } else if (c == '\r' && pos < text.size() && text[pos] == '\n') {
        // CRLF: the '\n' ends the record on the next iteration.
      } else if (c == '\n') {
        ++line;
        rec.fields.push_back(std::move(field));
        done = true;
      } else {
        field.push_back(c);
      }
    }
    if (!blank(rec)) rows.push_back(std::move(rec));
  }
  if (rows.empty()) throw std::runtime_error("delimited file is empty (no header row)");

  DelimitedTable table;
  table.header = std::move(rows.front().fields);
  table.records.assign(std::make_move_iterator(rows.begin() + 1),
                       std::make_move_iterator(rows.end()));
  return table;
}

std::string quote_field(const std::string& field, char delimiter) {
  if (field.find_first_of(std::string{delimiter, '"', '\n', '\r'}) == std::string::npos)
    return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace emostress::io
