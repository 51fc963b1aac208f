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

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "unilabel/error.hpp"
#include "unilabel/taxonomy.hpp"

namespace unilabel {

using json = nlohmann::json;

std::optional<int> UniversalLabelSpace::find_by_name(std::string_view name) const {
  const std::string wanted = normalize_name(name);
  for (const auto& c : classes) {
    if (normalize_name(c.name) == wanted) return c.id;
  }
  return std::nullopt;
}

std::optional<int> DatasetMapping::lookup(int local_id) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), std::make_pair(local_id, -1));
  if (it == entries.end() || it->first != local_id) return std::nullopt;
  return it->second;
}

const DatasetMapping* ClassMap::find(std::string_view dataset_id) const {
  for (const auto& d : datasets) {
    if (d.dataset_id == dataset_id) return &d;
  }
  return nullptr;
}

const DatasetMapping& ClassMap::at(std::string_view dataset_id) const {
  if (const DatasetMapping* d = find(dataset_id)) return *d;
  throw Error(ErrorKind::kReference, "unknown dataset '" + std::string(dataset_id) + "'");
}

int ClassMap::map(std::string_view dataset_id, int local_id) const {
  auto id = at(dataset_id).lookup(local_id);
  if (!id) {
    throw Error(ErrorKind::kReference, "class id " + std::to_string(local_id) +
                                           " is not declared by dataset '" +
                                           std::string(dataset_id) + "'");
  }
  return *id;
}

MergeResult merge_label_spaces(std::span<const DatasetTaxonomy> taxonomies,
                               std::span<const Directive> directives) {
  if (taxonomies.empty()) throw Error(ErrorKind::kArgument, "no taxonomies to merge");
  std::map<std::string, std::size_t> dataset_order;
  for (std::size_t i = 0; i < taxonomies.size(); ++i) {
    if (!dataset_order.emplace(taxonomies[i].dataset_id, i).second) {
      throw Error(ErrorKind::kConflict, "dataset '" + taxonomies[i].dataset_id + "' given twice");
    }
  }

  // Each class may be the subject of at most one directive.
  std::map<ClassRef, std::size_t> owner;
  for (std::size_t i = 0; i < directives.size(); ++i) {
    for (const ClassRef& ref : directives[i].operands) {
      auto ds = dataset_order.find(ref.dataset_id);
      if (ds == dataset_order.end() || taxonomies[ds->second].find(ref.local_id) == nullptr) {
        throw Error(ErrorKind::kReference, "directive on line " + std::to_string(directives[i].line) +
                                               " refers to an unknown class");
      }
      auto [it, inserted] = owner.emplace(ref, i);
      if (!inserted) {
        const Directive& first = directives[it->second];
        const Directive& second = directives[i];
        const bool merged_and_dropped =
            (first.kind == DirectiveKind::kMerge && second.kind == DirectiveKind::kMapIgnore) ||
            (first.kind == DirectiveKind::kMapIgnore && second.kind == DirectiveKind::kMerge);
        throw Error(ErrorKind::kConflict,
                    std::string(merged_and_dropped ? "class is both merged and map_ignore'd"
                                                   : "class is the subject of two directives") +
                        ": " + ref.dataset_id + "." + std::to_string(ref.local_id) + " (lines " +
                        std::to_string(first.line) + " and " + std::to_string(second.line) + ")");
      }
    }
  }

  MergeResult result;
  std::map<std::size_t, int> merge_slot;  // directive index -> universal id

  for (const DatasetTaxonomy& taxonomy : taxonomies) {
    std::vector<const ClassDef*> sorted;
    for (const auto& c : taxonomy.classes) sorted.push_back(&c);
    std::sort(sorted.begin(), sorted.end(),
              [](const ClassDef* a, const ClassDef* b) { return a->id < b->id; });

    DatasetMapping mapping{taxonomy.dataset_id, taxonomy.encoding, {}};
    for (const ClassDef* c : sorted) {
      const ClassRef ref{taxonomy.dataset_id, c->id};
      int universal = kIgnoreId;
      if (!c->ignored) {
        auto it = owner.find(ref);
        const Directive* d = it == owner.end() ? nullptr : &directives[it->second];
        if (d != nullptr && d->kind == DirectiveKind::kMapIgnore) {
          universal = kIgnoreId;
        } else if (d != nullptr && d->kind == DirectiveKind::kMerge &&
                   merge_slot.contains(it->second)) {
          universal = merge_slot[it->second];
          result.space.classes[universal].contributors.push_back(ref);
        } else {
          universal = static_cast<int>(result.space.classes.size());
          if (universal > kMaxClassId) {
            throw Error(ErrorKind::kRange, "universal label-space exceeds 255 classes");
          }
          std::string name = (d != nullptr) ? *d->new_name : c->name;
          result.space.classes.push_back(UniversalClass{universal, std::move(name), {ref}});
          if (d != nullptr && d->kind == DirectiveKind::kMerge) merge_slot[it->second] = universal;
        }
      }
      mapping.entries.emplace_back(c->id, universal);
    }
    result.class_map.datasets.push_back(std::move(mapping));
  }

  std::map<std::string, int> names;
  for (const auto& c : result.space.classes) {
    auto [it, inserted] = names.emplace(normalize_name(c.name), c.id);
    if (!inserted) {
      throw Error(ErrorKind::kCollision, "universal classes " + std::to_string(it->second) +
                                             " and " + std::to_string(c.id) +
                                             " share the name '" + c.name + "'");
    }
  }
  return result;
}

std::vector<int> reachable_classes(const UniversalLabelSpace& space, std::string_view dataset_id) {
  std::vector<int> out;
  for (const auto& c : space.classes) {
    if (std::any_of(c.contributors.begin(), c.contributors.end(),
                    [&](const ClassRef& r) { return r.dataset_id == dataset_id; })) {
      out.push_back(c.id);
    }
  }
  return out;
}

std::string to_json(const MergeResult& merged) {
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (const auto& c : merged.space.classes) {
    nlohmann::ordered_json contributors = nlohmann::ordered_json::array();
    for (const auto& r : c.contributors) {
      contributors.push_back({{"dataset", r.dataset_id}, {"id", r.local_id}});
    }
    classes.push_back({{"id", c.id}, {"name", c.name}, {"contributors", std::move(contributors)}});
  }
  nlohmann::ordered_json datasets = nlohmann::ordered_json::array();
  for (const auto& d : merged.class_map.datasets) {
    nlohmann::ordered_json declared = nlohmann::ordered_json::array();
    for (const auto& [local, universal] : d.entries) declared.push_back(local);
    datasets.push_back(
        {{"id", d.dataset_id}, {"encoding", to_string(d.encoding)}, {"declared", std::move(declared)}});
  }
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  doc["classes"] = std::move(classes);
  doc["ignore_id"] = merged.space.ignore_id;
  doc["datasets"] = std::move(datasets);
  return doc.dump(2) + "\n";
}

MergeResult merge_result_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("universal label-space JSON: ") + e.what());
  }

  MergeResult result;
  try {
    if (doc.at("ignore_id").get<int>() != kIgnoreId) {
      throw Error(ErrorKind::kRange, "ignore_id must be 255");
    }
    std::map<ClassRef, int> contributor_of;
    for (const auto& jc : doc.at("classes")) {
      UniversalClass c;
      c.id = jc.at("id").get<int>();
      c.name = jc.at("name").get<std::string>();
      if (c.id != static_cast<int>(result.space.classes.size()) || c.id > kMaxClassId) {
        throw Error(ErrorKind::kParse, "universal class ids must be consecutive from 0");
      }
      if (normalize_name(c.name).empty()) throw Error(ErrorKind::kParse, "empty class name");
      for (const auto& jr : jc.at("contributors")) {
        ClassRef r{jr.at("dataset").get<std::string>(), jr.at("id").get<int>()};
        if (!contributor_of.emplace(r, c.id).second) {
          throw Error(ErrorKind::kConflict, "contributor " + r.dataset_id + "." +
                                                std::to_string(r.local_id) + " listed twice");
        }
        c.contributors.push_back(std::move(r));
      }
      if (c.contributors.empty()) {
        throw Error(ErrorKind::kParse, "universal class " + std::to_string(c.id) + " has no contributors");
      }
      result.space.classes.push_back(std::move(c));
    }

    std::set<std::string> seen_names;
    for (const auto& c : result.space.classes) {
      if (!seen_names.insert(normalize_name(c.name)).second) {
        throw Error(ErrorKind::kCollision, "duplicate universal class name '" + c.name + "'");
      }
    }

    std::size_t matched = 0;
    for (const auto& jd : doc.at("datasets")) {
      DatasetMapping m;
      m.dataset_id = jd.at("id").get<std::string>();
      m.encoding = parse_encoding(jd.at("encoding").get<std::string>());
      if (result.class_map.find(m.dataset_id) != nullptr) {
        throw Error(ErrorKind::kConflict, "dataset '" + m.dataset_id + "' listed twice");
      }
      for (const auto& jid : jd.at("declared")) {
        const int local = jid.get<int>();
        if (local < 0 || local > 255) throw Error(ErrorKind::kRange, "declared id out of range");
        auto it = contributor_of.find(ClassRef{m.dataset_id, local});
        const int universal = it == contributor_of.end() ? kIgnoreId : it->second;
        if (it != contributor_of.end()) ++matched;
        m.entries.emplace_back(local, universal);
      }
      std::sort(m.entries.begin(), m.entries.end());
      if (std::adjacent_find(m.entries.begin(), m.entries.end(), [](const auto& a, const auto& b) {
            return a.first == b.first;
          }) != m.entries.end()) {
        throw Error(ErrorKind::kConflict, "dataset '" + m.dataset_id + "' declares an id twice");
      }
      result.class_map.datasets.push_back(std::move(m));
    }
    if (matched != contributor_of.size()) {
      throw Error(ErrorKind::kReference, "a contributor is not declared by its dataset");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("universal label-space JSON: ") + e.what());
  }

  // Contributors are kept in (dataset order, local id) order.
  std::map<std::string, std::size_t> order;
  for (std::size_t i = 0; i < result.class_map.datasets.size(); ++i) {
    order[result.class_map.datasets[i].dataset_id] = i;
  }
  for (auto& c : result.space.classes) {
    std::sort(c.contributors.begin(), c.contributors.end(), [&](const ClassRef& a, const ClassRef& b) {
      return std::make_pair(order[a.dataset_id], a.local_id) < std::make_pair(order[b.dataset_id], b.local_id);
    });
  }
  return result;
}

Lut::Lut() {
  for (int i = 0; i < 256; ++i) {
    table_[i] = static_cast<std::uint8_t>(i);
    declared_[i] = 1;
  }
}

Lut Lut::build(const ClassMap& map, std::string_view dataset_id, bool strict) {
  const DatasetMapping& mapping = map.at(dataset_id);
  Lut lut;
  lut.strict_ = strict;
  lut.dataset_id_ = mapping.dataset_id;
  lut.table_.fill(kIgnoreId);
  lut.declared_.fill(0);
  for (const auto& [local, universal] : mapping.entries) {
    lut.table_[local] = static_cast<std::uint8_t>(universal);
    lut.declared_[local] = 1;
  }
  lut.table_[kIgnoreId] = kIgnoreId;
  lut.declared_[kIgnoreId] = 1;
  return lut;
}

Lut Lut::identity(int class_count, bool strict) {
  if (class_count < 0 || class_count > kIgnoreId) {
    throw Error(ErrorKind::kRange, "identity LUT class count out of range");
  }
  Lut lut;
  lut.strict_ = strict;
  lut.table_.fill(kIgnoreId);
  lut.declared_.fill(0);
  for (int i = 0; i < class_count; ++i) {
    lut.table_[i] = static_cast<std::uint8_t>(i);
    lut.declared_[i] = 1;
  }
  lut.declared_[kIgnoreId] = 1;
  return lut;
}

}  // namespace unilabel
