// Copyright 2026 The Unilabel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small helpers shared by the line-oriented parsers. Internal header.

#ifndef UNILABEL_SRC_TEXT_UTIL_HPP
#define UNILABEL_SRC_TEXT_UTIL_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "unilabel/error.hpp"

namespace unilabel::detail {

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f'; }

inline char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

struct Line {
  std::size_t number;  // 1-based
  std::string_view text;
};

inline std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 1;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (end == text.size() && line.empty()) break;
    lines.push_back({number++, line});
    start = end + 1;
  }
  return lines;
}

// Throws ParseError at the line holding the first malformed sequence.
inline void require_utf8(std::string_view text) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < text.size();) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c == '\n') ++line;
    std::size_t extra = 0;
    unsigned min = 0;
    unsigned cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1, min = 0x80, cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2, min = 0x800, cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3, min = 0x10000, cp = c & 0x07;
    } else {
      throw ParseError(line, "invalid UTF-8");
    }
    if (i + extra >= text.size()) {
      throw ParseError(line, "truncated UTF-8 sequence");
    }
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) throw ParseError(line, "invalid UTF-8");
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      throw ParseError(line, "invalid UTF-8");
    }
    i += extra + 1;
  }
}

// Whitespace tokenizer over one line. '#' at a token boundary starts a
// comment; double-quoted strings are read verbatim (no escapes).
class Tokenizer {
 public:
  Tokenizer(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  std::optional<std::string_view> next_word() {
    skip_space();
    if (at_end()) return std::nullopt;
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_])) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  std::optional<std::string_view> next_quoted() {
    skip_space();
    if (at_end()) return std::nullopt;
    if (text_[pos_] != '"') throw ParseError(line_, "expected a double-quoted string");
    const std::size_t close = text_.find('"', pos_ + 1);
    if (close == std::string_view::npos) throw ParseError(line_, "unterminated string");
    std::string_view out = text_.substr(pos_ + 1, close - pos_ - 1);
    pos_ = close + 1;
    if (pos_ < text_.size() && !is_space(text_[pos_]) && text_[pos_] != '#') {
      throw ParseError(line_, "unexpected text after closing quote");
    }
    return out;
  }

  void expect_end() {
    skip_space();
    if (!at_end()) {
      throw ParseError(line_, "unexpected trailing text '" + std::string(text_.substr(pos_)) + "'");
    }
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }
  bool at_end() const { return pos_ >= text_.size() || text_[pos_] == '#'; }

  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

}  // namespace unilabel::detail

#endif  // UNILABEL_SRC_TEXT_UTIL_HPP
