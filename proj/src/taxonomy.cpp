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

#include "unilabel/taxonomy.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "text_util.hpp"
#include "unilabel/error.hpp"

namespace unilabel {

using detail::Line;
using detail::split_lines;
using detail::Tokenizer;

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kReference: return "reference";
    case ErrorKind::kConflict: return "conflict";
    case ErrorKind::kCollision: return "collision";
    case ErrorKind::kRange: return "range";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kArgument: return "argument";
  }
  return "unknown";
}

const char* to_string(Encoding encoding) {
  return encoding == Encoding::kIndexed ? "indexed" : "color-coded";
}

Encoding parse_encoding(std::string_view text) {
  if (text == "indexed") return Encoding::kIndexed;
  if (text == "color-coded") return Encoding::kColorCoded;
  throw Error(ErrorKind::kParse, "unknown encoding '" + std::string(text) + "'");
}

std::string normalize_name(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  bool pending_space = false;
  for (char c : name) {
    if (detail::is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(detail::ascii_lower(c));
  }
  return out;
}

std::string reference_token(std::string_view name) {
  std::string out = normalize_name(name);
  std::replace(out.begin(), out.end(), ' ', '_');
  return out;
}

const ClassDef* DatasetTaxonomy::find(int id) const {
  auto it = std::find_if(classes.begin(), classes.end(),
                         [id](const ClassDef& c) { return c.id == id; });
  return it == classes.end() ? nullptr : &*it;
}

const ClassDef* DatasetTaxonomy::find_by_reference(std::string_view token) const {
  const std::string wanted = reference_token(token);
  auto it = std::find_if(classes.begin(), classes.end(), [&](const ClassDef& c) {
    return reference_token(c.name) == wanted;
  });
  return it == classes.end() ? nullptr : &*it;
}

std::size_t DatasetTaxonomy::evaluation_class_count() const {
  return static_cast<std::size_t>(
      std::count_if(classes.begin(), classes.end(), [](const ClassDef& c) { return !c.ignored; }));
}

namespace {

bool valid_dataset_token(std::string_view token) {
  return !token.empty() && std::all_of(token.begin(), token.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

int parse_id(std::string_view text, std::size_t line) {
  int value = -1;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value < 0) {
    throw ParseError(line, "expected a non-negative class id, got '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

DatasetTaxonomy parse_taxonomy(std::string_view text) {
  detail::require_utf8(text);

  DatasetTaxonomy taxonomy;
  bool have_header = false;
  std::map<int, std::size_t> id_lines;
  std::map<std::string, std::size_t> name_lines;
  std::size_t last_line = 0;

  for (const Line& line : split_lines(text)) {
    last_line = line.number;
    Tokenizer tok(line.text, line.number);
    auto keyword = tok.next_word();
    if (!keyword) continue;

    if (*keyword == "dataset") {
      if (have_header) throw ParseError(line.number, "duplicate dataset header");
      auto token = tok.next_word();
      if (!token || !valid_dataset_token(*token)) {
        throw ParseError(line.number, "dataset id must match [a-z0-9_]+");
      }
      taxonomy.dataset_id = std::string(*token);
      while (auto attr = tok.next_word()) {
        if (attr->starts_with("encoding=")) {
          try {
            taxonomy.encoding = parse_encoding(attr->substr(9));
          } catch (const Error& e) {
            throw ParseError(line.number, e.what());
          }
        } else {
          throw ParseError(line.number, "unknown header attribute '" + std::string(*attr) + "'");
        }
      }
      have_header = true;
      continue;
    }

    if (*keyword != "class" && *keyword != "ignore") {
      throw ParseError(line.number, "unknown keyword '" + std::string(*keyword) + "'");
    }
    if (!have_header) throw ParseError(line.number, "missing dataset header before first class");

    ClassDef def;
    def.ignored = (*keyword == "ignore");
    auto id_text = tok.next_word();
    if (!id_text) throw ParseError(line.number, "missing class id");
    def.id = parse_id(*id_text, line.number);
    if (def.id > 255 || (!def.ignored && def.id > kMaxClassId)) {
      throw ParseError(line.number, "class id " + std::to_string(def.id) + " out of range (max " +
                                        std::to_string(def.ignored ? 255 : kMaxClassId) + ")");
    }
    auto name = tok.next_quoted();
    if (!name) throw ParseError(line.number, "missing quoted class name");
    def.name = detail::trim(*name);
    if (def.name.empty()) throw ParseError(line.number, "empty class name");
    tok.expect_end();

    if (auto [it, inserted] = id_lines.emplace(def.id, line.number); !inserted) {
      throw ParseError(line.number, "duplicate class id " + std::to_string(def.id) +
                                        " (first declared on line " + std::to_string(it->second) + ")");
    }
    if (auto [it, inserted] = name_lines.emplace(normalize_name(def.name), line.number); !inserted) {
      throw ParseError(line.number, "duplicate class name '" + def.name +
                                        "' (first declared on line " + std::to_string(it->second) + ")");
    }
    taxonomy.classes.push_back(std::move(def));
  }

  if (!have_header) throw ParseError(std::max<std::size_t>(last_line, 1), "missing dataset header");
  if (taxonomy.evaluation_class_count() == 0) {
    throw ParseError(std::max<std::size_t>(last_line, 1),
                     "dataset '" + taxonomy.dataset_id + "' declares no evaluation classes");
  }
  return taxonomy;
}

std::string format_taxonomy(const DatasetTaxonomy& taxonomy) {
  std::ostringstream out;
  out << "dataset " << taxonomy.dataset_id << " encoding=" << to_string(taxonomy.encoding) << "\n";
  for (const ClassDef& c : taxonomy.classes) {
    out << (c.ignored ? "ignore " : "class ") << c.id << " \"" << c.name << "\"\n";
  }
  return out.str();
}

namespace {

struct ResolvedRef {
  ClassRef ref;
  const ClassDef* def = nullptr;
};

ResolvedRef resolve(std::string_view text, std::span<const DatasetTaxonomy> taxonomies,
                    std::size_t line) {
  const auto dot = text.find('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == text.size()) {
    throw ParseError(line, "expected <dataset>.<class>, got '" + std::string(text) + "'");
  }
  const std::string_view dataset = text.substr(0, dot);
  const std::string_view cls = text.substr(dot + 1);
  auto ds = std::find_if(taxonomies.begin(), taxonomies.end(),
                         [&](const DatasetTaxonomy& t) { return t.dataset_id == dataset; });
  if (ds == taxonomies.end()) {
    throw Error(ErrorKind::kReference,
                "line " + std::to_string(line) + ": unknown dataset '" + std::string(dataset) + "'");
  }
  const ClassDef* def = ds->find_by_reference(cls);
  if (def == nullptr) {
    throw Error(ErrorKind::kReference, "line " + std::to_string(line) + ": unknown class '" +
                                           std::string(cls) + "' in dataset '" +
                                           std::string(dataset) + "'");
  }
  if (def->ignored) {
    throw Error(ErrorKind::kReference, "line " + std::to_string(line) + ": class '" +
                                           std::string(text) + "' is an ignore class");
  }
  return {ClassRef{ds->dataset_id, def->id}, def};
}

}  // namespace

std::vector<Directive> parse_directives(std::string_view text,
                                        std::span<const DatasetTaxonomy> taxonomies) {
  detail::require_utf8(text);

  std::set<std::string> existing_names;
  for (const auto& t : taxonomies) {
    for (const auto& c : t.classes) existing_names.insert(normalize_name(c.name));
  }

  std::vector<Directive> directives;
  for (const Line& line : split_lines(text)) {
    Tokenizer tok(line.text, line.number);
    auto keyword = tok.next_word();
    if (!keyword) continue;

    Directive d;
    d.line = line.number;
    if (*keyword == "merge") {
      d.kind = DirectiveKind::kMerge;
      std::set<std::string> datasets;
      for (;;) {
        auto word = tok.next_word();
        if (!word) throw ParseError(line.number, "merge is missing '-> \"<name>\"'");
        if (*word == "->") break;
        ResolvedRef r = resolve(*word, taxonomies, line.number);
        if (std::find(d.operands.begin(), d.operands.end(), r.ref) != d.operands.end()) {
          throw Error(ErrorKind::kConflict, "line " + std::to_string(line.number) +
                                                ": operand '" + std::string(*word) +
                                                "' listed twice");
        }
        datasets.insert(r.ref.dataset_id);
        d.operands.push_back(std::move(r.ref));
      }
      if (d.operands.size() < 2) {
        throw ParseError(line.number, "merge needs at least two operands");
      }
      if (datasets.size() < 2) {
        throw Error(ErrorKind::kConflict, "line " + std::to_string(line.number) +
                                              ": merge operands all come from dataset '" +
                                              *datasets.begin() + "'");
      }
    } else if (*keyword == "rename") {
      d.kind = DirectiveKind::kRename;
      auto word = tok.next_word();
      if (!word) throw ParseError(line.number, "rename needs an operand");
      ResolvedRef r = resolve(*word, taxonomies, line.number);
      d.operands.push_back(r.ref);
      auto name = tok.next_quoted();
      if (!name) throw ParseError(line.number, "rename needs a quoted new name");
      const std::string normalized = normalize_name(*name);
      if (normalized != normalize_name(r.def->name) && existing_names.contains(normalized)) {
        throw Error(ErrorKind::kCollision, "line " + std::to_string(line.number) +
                                               ": new name '" + std::string(*name) +
                                               "' collides with an existing class");
      }
      d.new_name = detail::trim(*name);
      if (d.new_name->empty()) throw ParseError(line.number, "empty new name");
    } else if (*keyword == "map_ignore") {
      d.kind = DirectiveKind::kMapIgnore;
      auto word = tok.next_word();
      if (!word) throw ParseError(line.number, "map_ignore needs an operand");
      d.operands.push_back(resolve(*word, taxonomies, line.number).ref);
    } else {
      throw ParseError(line.number, "unknown directive '" + std::string(*keyword) + "'");
    }

    if (d.kind == DirectiveKind::kMerge) {
      auto name = tok.next_quoted();
      if (!name) throw ParseError(line.number, "merge needs a quoted new name after '->'");
      d.new_name = detail::trim(*name);
      if (d.new_name->empty()) throw ParseError(line.number, "empty new name");
    }
    tok.expect_end();
    directives.push_back(std::move(d));
  }
  return directives;
}

}  // namespace unilabel
