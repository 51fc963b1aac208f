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

#ifndef UNILABEL_TAXONOMY_HPP
#define UNILABEL_TAXONOMY_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace unilabel {

// Label value that is never trained on or evaluated, in every label-space.
inline constexpr std::uint8_t kIgnoreId = 255;
// Largest id an evaluation class may use.
inline constexpr int kMaxClassId = 254;

enum class Encoding { kIndexed, kColorCoded };

const char* to_string(Encoding encoding);
Encoding parse_encoding(std::string_view text);

// Lowercase, trim, and collapse inner whitespace runs to one space.
std::string normalize_name(std::string_view name);

// Normalized name with spaces replaced by '_', as written in directive files.
std::string reference_token(std::string_view name);

struct ClassDef {
  int id = 0;
  std::string name;
  bool ignored = false;
};

struct DatasetTaxonomy {
  std::string dataset_id;
  Encoding encoding = Encoding::kIndexed;
  std::vector<ClassDef> classes;  // file order

  const ClassDef* find(int id) const;
  const ClassDef* find_by_reference(std::string_view token) const;
  std::size_t evaluation_class_count() const;
};

// Parses the line-oriented taxonomy format:
//
//   dataset <token> [encoding=indexed|color-coded]
//   class <id> "<name>"
//   ignore <id> "<name>"
//
// '#' starts a comment anywhere outside a quoted name. Errors are ParseError
// carrying the offending line number.
DatasetTaxonomy parse_taxonomy(std::string_view text);

std::string format_taxonomy(const DatasetTaxonomy& taxonomy);

struct ClassRef {
  std::string dataset_id;
  int local_id = 0;

  friend bool operator==(const ClassRef&, const ClassRef&) = default;
  friend auto operator<=>(const ClassRef&, const ClassRef&) = default;
};

enum class DirectiveKind { kMerge, kRename, kMapIgnore };

struct Directive {
  DirectiveKind kind = DirectiveKind::kMerge;
  std::vector<ClassRef> operands;
  std::optional<std::string> new_name;  // merge and rename only
  std::size_t line = 0;
};

// Parses merge / rename / map_ignore lines and resolves every operand against
// `taxonomies`. Operands must name existing, non-ignored classes.
std::vector<Directive> parse_directives(std::string_view text,
                                        std::span<const DatasetTaxonomy> taxonomies);

struct UniversalClass {
  int id = 0;
  std::string name;
  std::vector<ClassRef> contributors;  // sorted by (dataset order, local id)

  friend bool operator==(const UniversalClass&, const UniversalClass&) = default;
};

struct UniversalLabelSpace {
  std::vector<UniversalClass> classes;
  int ignore_id = kIgnoreId;

  std::size_t size() const { return classes.size(); }
  std::optional<int> find_by_name(std::string_view name) const;

  friend bool operator==(const UniversalLabelSpace&, const UniversalLabelSpace&) = default;
};

// Per-dataset slice of the class mapping: every declared local id maps to a
// universal id or to kIgnoreId.
struct DatasetMapping {
  std::string dataset_id;
  Encoding encoding = Encoding::kIndexed;
  std::vector<std::pair<int, int>> entries;  // (local id, universal id), ascending local id

  std::optional<int> lookup(int local_id) const;

  friend bool operator==(const DatasetMapping&, const DatasetMapping&) = default;
};

struct ClassMap {
  std::vector<DatasetMapping> datasets;  // input order

  const DatasetMapping* find(std::string_view dataset_id) const;
  const DatasetMapping& at(std::string_view dataset_id) const;
  // Universal id of (dataset, local id); throws kReference if undeclared.
  int map(std::string_view dataset_id, int local_id) const;

  friend bool operator==(const ClassMap&, const ClassMap&) = default;
};

struct MergeResult {
  UniversalLabelSpace space;
  ClassMap class_map;

  friend bool operator==(const MergeResult&, const MergeResult&) = default;
};

// Builds the universal label-space. Unmerged classes each become their own
// universal class; ids follow first occurrence over (dataset order, local id)
// and a merged class sits at the position of its first contributor.
MergeResult merge_label_spaces(std::span<const DatasetTaxonomy> taxonomies,
                               std::span<const Directive> directives);

// Universal classes with at least one contributor from `dataset_id`.
std::vector<int> reachable_classes(const UniversalLabelSpace& space,
                                   std::string_view dataset_id);

// JSON persistence: {"classes":[{id,name,contributors[]}],"ignore_id":255,
// "datasets":[{id,encoding,declared[]}]}. The datasets key lets the ClassMap
// be rebuilt from the file alone.
std::string to_json(const MergeResult& merged);
MergeResult merge_result_from_json(std::string_view text);

// Compiled ClassMap slice for one dataset. `strict` LUTs reject undeclared
// local ids at remap time; lenient ones send them to kIgnoreId.
class Lut {
 public:
  Lut();  // identity over all 256 values, every id declared

  static Lut build(const ClassMap& map, std::string_view dataset_id, bool strict);
  static Lut identity(int class_count, bool strict);

  std::uint8_t operator[](std::uint8_t id) const { return table_[id]; }
  bool declared(std::uint8_t id) const { return declared_[id] != 0; }
  bool strict() const { return strict_; }
  // Dataset the LUT was compiled for; empty for identity LUTs.
  const std::string& dataset_id() const { return dataset_id_; }
  const std::array<std::uint8_t, 256>& table() const { return table_; }
  const std::array<std::uint8_t, 256>& declared_mask() const { return declared_; }

 private:
  std::array<std::uint8_t, 256> table_{};
  std::array<std::uint8_t, 256> declared_{};
  bool strict_ = true;
  std::string dataset_id_;
};

}  // namespace unilabel

#endif  // UNILABEL_TAXONOMY_HPP
