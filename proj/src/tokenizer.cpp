// Copyright (c) 2026, emostress authors
// SPDX-License-Identifier: Apache-2.0

#include "emostress/tokenizer.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/regex.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "emostress/io/atomic_file.hpp"

namespace emostress {

namespace {

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  const auto* p = reinterpret_cast<const std::uint8_t*>(s.data());
  const auto len = static_cast<std::int32_t>(s.size());
  std::int32_t i = 0;
  while (i < len) {
    UChar32 c;
    U8_NEXT(p, i, len, c);
    out.push_back(c < 0 ? 0xFFFD : static_cast<char32_t>(c));
  }
  return out;
}

std::string encode_utf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : s) {
    std::uint8_t buf[4];
    std::int32_t n = 0;
    UBool err = false;
    U8_APPEND(buf, n, 4, static_cast<UChar32>(c), err);
    if (err) continue;
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
  }
  return out;
}

std::u32string to_u32(const icu::UnicodeString& s) {
  std::u32string out;
  for (std::int32_t i = 0; i < s.length();) {
    const UChar32 c = s.char32At(i);
    out.push_back(static_cast<char32_t>(c));
    i += U16_LENGTH(c);
  }
  return out;
}

icu::UnicodeString from_u32(std::u32string_view s) {
  return icu::UnicodeString::fromUTF32(reinterpret_cast<const UChar32*>(s.data()),
                                       static_cast<std::int32_t>(s.size()));
}

const icu::Normalizer2& nfd() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFDInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFD normalizer unavailable");
  return *n;
}

bool is_whitespace(char32_t c) {
  if (c == ' ' || c == '\t' || c == '\n' || c == '\r') return true;
  return u_charType(static_cast<UChar32>(c)) == U_SPACE_SEPARATOR;
}

bool is_control(char32_t c) {
  if (c == '\t' || c == '\n' || c == '\r') return false;
  const auto t = u_charType(static_cast<UChar32>(c));
  return t == U_CONTROL_CHAR || t == U_FORMAT_CHAR || t == U_PRIVATE_USE_CHAR ||
         t == U_SURROGATE || t == U_UNASSIGNED;
}

bool is_punctuation(char32_t c) {
  if ((c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
      (c >= 123 && c <= 126))
    return true;
  switch (u_charType(static_cast<UChar32>(c))) {
    case U_DASH_PUNCTUATION:
    case U_START_PUNCTUATION:
    case U_END_PUNCTUATION:
    case U_CONNECTOR_PUNCTUATION:
    case U_OTHER_PUNCTUATION:
    case U_INITIAL_PUNCTUATION:
    case U_FINAL_PUNCTUATION:
      return true;
    default:
      return false;
  }
}

bool is_cjk(char32_t c) {
  return (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF) ||
         (c >= 0x20000 && c <= 0x2A6DF) || (c >= 0x2A700 && c <= 0x2B73F) ||
         (c >= 0x2B740 && c <= 0x2B81F) || (c >= 0x2B820 && c <= 0x2CEAF) ||
         (c >= 0xF900 && c <= 0xFAFF) || (c >= 0x2F800 && c <= 0x2FA1F);
}

int require_id(const std::unordered_map<std::string, int>& vocab, const std::string& token) {
  const auto it = vocab.find(token);
  if (it == vocab.end()) throw std::runtime_error("vocabulary lacks special token " + token);
  return it->second;
}

}  // namespace

TokenizedInput Tokenizer::tokenize(std::string_view text, std::size_t max_length) const {
  if (max_length < 2) throw std::invalid_argument("max_length must leave room for special tokens");
  auto body = encode_ids(text);
  TokenizedInput out;
  if (body.size() > max_length - 2) {
    body.resize(max_length - 2);
    out.truncated = true;
  }
  out.ids.reserve(body.size() + 2);
  out.ids.push_back(start_id_);
  out.ids.insert(out.ids.end(), body.begin(), body.end());
  out.ids.push_back(end_id_);
  out.attention_mask.assign(out.ids.size(), 1);
  return out;
}

// --- hashing -------------------------------------------------------------

HashingTokenizer::HashingTokenizer(std::size_t vocab_size) : vocab_size_(vocab_size) {
  if (vocab_size < 16) throw std::invalid_argument("hashing tokenizer needs a vocabulary of >= 16");
  pad_id_ = 0;
  start_id_ = 1;
  end_id_ = 2;
}

std::vector<int> HashingTokenizer::encode_ids(std::string_view text) const {
  std::vector<int> ids;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (unsigned char c : word) {
      h ^= c;
      h *= 1099511628211ull;
    }
    ids.push_back(4 + static_cast<int>(h % (vocab_size_ - 4)));
    word.clear();
  };
  for (unsigned char c : text) {
    if (c >= 0x80 || std::isalnum(c)) {
      word.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else {
      flush();
    }
  }
  flush();
  return ids;
}

// --- WordPiece -----------------------------------------------------------

WordPieceTokenizer::WordPieceTokenizer(const std::filesystem::path& vocab_file, bool lowercase)
    : lowercase_(lowercase) {
  std::ifstream in(vocab_file);
  if (!in) throw std::runtime_error("cannot open vocabulary " + vocab_file.string());
  std::string line;
  int id = 0;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    vocab_.emplace(line, id++);
  }
  start_id_ = require_id(vocab_, "[CLS]");
  end_id_ = require_id(vocab_, "[SEP]");
  pad_id_ = require_id(vocab_, "[PAD]");
  unk_id_ = require_id(vocab_, "[UNK]");
}

std::vector<std::string> WordPieceTokenizer::basic_tokenize(std::string_view text) const {
  std::u32string cleaned;
  for (char32_t c : decode_utf8(text)) {
    if (c == 0 || c == 0xFFFD || is_control(c)) continue;
    if (is_whitespace(c)) {
      cleaned.push_back(' ');
    } else if (is_cjk(c)) {
      cleaned.push_back(' ');
      cleaned.push_back(c);
      cleaned.push_back(' ');
    } else {
      cleaned.push_back(c);
    }
  }
  if (lowercase_) {
    UErrorCode status = U_ZERO_ERROR;
    icu::UnicodeString decomposed = nfd().normalize(from_u32(cleaned), status);
    if (U_FAILURE(status)) throw std::runtime_error("ICU normalization failed");
    std::u32string stripped;
    for (char32_t c : to_u32(decomposed))
      if (u_charType(static_cast<UChar32>(c)) != U_NON_SPACING_MARK) stripped.push_back(c);
    icu::UnicodeString lowered = from_u32(stripped);
    lowered.toLower(icu::Locale::getRoot());
    cleaned = to_u32(lowered);
  }

  std::vector<std::string> tokens;
  std::u32string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(encode_utf8(current));
    current.clear();
  };
  for (char32_t c : cleaned) {
    if (is_whitespace(c)) {
      flush();
    } else if (is_punctuation(c)) {
      flush();
      tokens.push_back(encode_utf8(std::u32string(1, c)));
    } else {
      current.push_back(c);
    }
  }
  flush();
  return tokens;
}

void WordPieceTokenizer::wordpiece(const std::string& word, std::vector<int>& out) const {
  const std::u32string chars = decode_utf8(word);
  if (chars.size() > 100) {
    out.push_back(unk_id_);
    return;
  }
  std::vector<int> pieces;
  std::size_t start = 0;
  while (start < chars.size()) {
    std::size_t end = chars.size();
    int found = -1;
    while (start < end) {
      std::string piece = encode_utf8(std::u32string_view(chars).substr(start, end - start));
      if (start > 0) piece = "##" + piece;
      const auto it = vocab_.find(piece);
      if (it != vocab_.end()) {
        found = it->second;
        break;
      }
      --end;
    }
    if (found < 0) {
      out.push_back(unk_id_);
      return;
    }
    pieces.push_back(found);
    start = end;
  }
  out.insert(out.end(), pieces.begin(), pieces.end());
}

std::vector<int> WordPieceTokenizer::encode_ids(std::string_view text) const {
  std::vector<int> ids;
  for (const auto& word : basic_tokenize(text)) wordpiece(word, ids);
  return ids;
}

// --- byte-level BPE ------------------------------------------------------

struct ByteBpeTokenizer::Pattern {
  std::unique_ptr<icu::RegexPattern> regex;
};

ByteBpeTokenizer::ByteBpeTokenizer(const std::filesystem::path& vocab_json,
                                   const std::filesystem::path& merges)
    : pattern_(std::make_unique<Pattern>()) {
  const auto vocab = nlohmann::json::parse(io::read_file(vocab_json));
  for (const auto& [token, id] : vocab.items()) vocab_.emplace(token, id.get<int>());

  std::ifstream in(merges);
  if (!in) throw std::runtime_error("cannot open merges " + merges.string());
  std::string line;
  std::size_t rank = 0;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty() || line.starts_with("#version")) continue;
    const auto sp = line.find(' ');
    if (sp == std::string::npos) throw std::runtime_error("malformed merge rule: " + line);
    merge_rank_.emplace(std::make_pair(line.substr(0, sp), line.substr(sp + 1)), rank++);
  }

  // Reversible byte -> printable code point table.
  std::vector<int> printable;
  for (int b = '!'; b <= '~'; ++b) printable.push_back(b);
  for (int b = 0xA1; b <= 0xAC; ++b) printable.push_back(b);
  for (int b = 0xAE; b <= 0xFF; ++b) printable.push_back(b);
  byte_symbol_.assign(256, {});
  int extra = 0;
  for (int b = 0; b < 256; ++b) {
    const bool direct = std::find(printable.begin(), printable.end(), b) != printable.end();
    const char32_t cp = direct ? static_cast<char32_t>(b) : static_cast<char32_t>(256 + extra++);
    byte_symbol_[static_cast<std::size_t>(b)] = encode_utf8(std::u32string(1, cp));
  }

  UErrorCode status = U_ZERO_ERROR;
  UParseError perr;
  pattern_->regex.reset(icu::RegexPattern::compile(
      icu::UnicodeString::fromUTF8(
          R"('s|'t|'re|'ve|'m|'ll|'d| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+(?!\S)|\s+)"),
      0, perr, status));
  if (U_FAILURE(status)) throw std::runtime_error("cannot compile BPE pre-tokenizer pattern");

  start_id_ = require_id(vocab_, "<s>");
  end_id_ = require_id(vocab_, "</s>");
  pad_id_ = require_id(vocab_, "<pad>");
  unk_id_ = require_id(vocab_, "<unk>");
}

ByteBpeTokenizer::~ByteBpeTokenizer() = default;

std::vector<std::string> ByteBpeTokenizer::pretokenize(std::string_view text) const {
  const icu::UnicodeString input = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<std::int32_t>(text.size())));
  UErrorCode status = U_ZERO_ERROR;
  std::unique_ptr<icu::RegexMatcher> m(pattern_->regex->matcher(input, status));
  if (U_FAILURE(status)) throw std::runtime_error("cannot create BPE matcher");
  std::vector<std::string> pieces;
  while (m->find(status) && U_SUCCESS(status)) {
    std::string piece;
    m->group(status).toUTF8String(piece);
    pieces.push_back(std::move(piece));
  }
  return pieces;
}

std::vector<std::string> ByteBpeTokenizer::bpe(const std::string& mapped) const {
  std::vector<std::string> word;
  for (char32_t c : decode_utf8(mapped)) word.push_back(encode_utf8(std::u32string(1, c)));
  while (word.size() > 1) {
    std::size_t best_rank = std::numeric_limits<std::size_t>::max();
    std::pair<std::string, std::string> best;
    for (std::size_t i = 0; i + 1 < word.size(); ++i) {
      const auto it = merge_rank_.find({word[i], word[i + 1]});
      if (it != merge_rank_.end() && it->second < best_rank) {
        best_rank = it->second;
        best = it->first;
      }
    }
    if (best_rank == std::numeric_limits<std::size_t>::max()) break;
    std::vector<std::string> merged;
    for (std::size_t i = 0; i < word.size();) {
      if (i + 1 < word.size() && word[i] == best.first && word[i + 1] == best.second) {
        merged.push_back(word[i] + word[i + 1]);
        i += 2;
      } else {
        merged.push_back(word[i]);
        ++i;
      }
    }
    word = std::move(merged);
  }
  return word;
}

std::vector<int> ByteBpeTokenizer::encode_ids(std::string_view text) const {
  std::vector<int> ids;
  for (const auto& piece : pretokenize(text)) {
    std::string mapped;
    for (unsigned char b : piece) mapped += byte_symbol_[b];
    for (const auto& sym : bpe(mapped)) {
      const auto it = vocab_.find(sym);
      ids.push_back(it == vocab_.end() ? unk_id_ : it->second);
    }
  }
  return ids;
}

}  // namespace emostress
