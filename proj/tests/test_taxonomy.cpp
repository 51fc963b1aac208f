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

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "support.hpp"
#include "unilabel/error.hpp"
#include "unilabel/taxonomy.hpp"

namespace ul = unilabel;
using namespace unilabel::testing;

namespace {

ul::ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const ul::Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ul::ErrorKind::kArgument;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const ul::Error& e) {
    return e.what();
  }
  FAIL("expected an error");
  return {};
}

}  // namespace

TEST_CASE("parse_taxonomy: minimal document") {
  const auto t = ul::parse_taxonomy("dataset toy\nclass 0 \"water\"\nclass 1 \"rock\"\n");
  CHECK(t.dataset_id == "toy");
  CHECK(t.encoding == ul::Encoding::kIndexed);
  CHECK(t.evaluation_class_count() == 2);
  REQUIRE(t.classes.size() == 2);
  CHECK(t.classes[0].name == "water");
  CHECK(t.classes[1].id == 1);
}

TEST_CASE("parse_taxonomy: shipped fixtures have 19 / 8 / 37 evaluation classes") {
  const auto t = shipped_taxonomies();
  CHECK(t[0].dataset_id == "cityscapes");
  CHECK(t[0].evaluation_class_count() == 19);
  CHECK(t[1].dataset_id == "suim");
  CHECK(t[1].encoding == ul::Encoding::kColorCoded);
  CHECK(t[1].evaluation_class_count() == 8);
  CHECK(t[2].dataset_id == "sun_rgbd");
  CHECK(t[2].evaluation_class_count() == 37);
}

TEST_CASE("parse_taxonomy: comments, ignore lines, whitespace") {
  const auto t = ul::parse_taxonomy(
      "# header comment\n"
      "dataset toy encoding=color-coded   # trailing\n"
      "\n"
      "ignore 255 \"void\"\n"
      "class 3 \"  Sea   Floor \"  # name is normalized\n");
  CHECK(t.encoding == ul::Encoding::kColorCoded);
  REQUIRE(t.classes.size() == 2);
  CHECK(t.classes[0].ignored);
  CHECK(t.classes[1].name == "Sea   Floor");
  CHECK(ul::normalize_name(t.classes[1].name) == "sea floor");
  CHECK(t.evaluation_class_count() == 1);
  CHECK(t.find_by_reference("sea_floor") == &t.classes[1]);
}

TEST_CASE("parse_taxonomy: errors carry line numbers") {
  SUBCASE("duplicate id") {
    const std::string text = "dataset toy\nclass 3 \"a\"\nclass 3 \"b\"\n";
    try {
      ul::parse_taxonomy(text);
      FAIL("expected an error");
    } catch (const ul::ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(std::string(e.what()).find("line 3") == 0);
      CHECK(std::string(e.what()).find("duplicate class id") != std::string::npos);
    }
  }
  SUBCASE("duplicate normalized name") {
    CHECK(message_of([] { ul::parse_taxonomy("dataset toy\nclass 0 \"Sky\"\nclass 1 \"sky\"\n"); })
              .find("line 3") == 0);
  }
  SUBCASE("missing header") {
    CHECK(message_of([] { ul::parse_taxonomy("class 0 \"a\"\n"); }).find("line 1") == 0);
    CHECK(kind_of([] { ul::parse_taxonomy(""); }) == ul::ErrorKind::kParse);
  }
  SUBCASE("id above 254 on an evaluation class") {
    CHECK(message_of([] { ul::parse_taxonomy("dataset toy\nclass 255 \"a\"\n"); }).find("line 2") == 0);
    CHECK_NOTHROW(ul::parse_taxonomy("dataset toy\nclass 0 \"a\"\nignore 255 \"void\"\n"));
  }
  SUBCASE("malformed lines") {
    for (const char* bad : {"dataset toy\nclass x \"a\"\n", "dataset toy\nclass 1 a\n", "dataset toy\nklass 1 \"a\"\n",
                            "dataset toy\nclass 1 \"a\" extra\n", "dataset Toy\nclass 1 \"a\"\n",
                            "dataset toy encoding=rgb\nclass 1 \"a\"\n", "dataset toy\nclass 1 \"unterminated\n"}) {
      CAPTURE(bad);
      CHECK(kind_of([&] { ul::parse_taxonomy(bad); }) == ul::ErrorKind::kParse);
    }
  }
  SUBCASE("no evaluation class") {
    CHECK(kind_of([] { ul::parse_taxonomy("dataset toy\nignore 0 \"void\"\n"); }) == ul::ErrorKind::kParse);
  }
  SUBCASE("invalid UTF-8") {
    CHECK(kind_of([] { ul::parse_taxonomy("dataset toy\nclass 0 \"\xff\"\n"); }) == ul::ErrorKind::kParse);
  }
}

TEST_CASE("format_taxonomy round trips") {
  for (const auto& t : shipped_taxonomies()) {
    const auto again = ul::parse_taxonomy(ul::format_taxonomy(t));
    CHECK(again.dataset_id == t.dataset_id);
    CHECK(again.encoding == t.encoding);
    REQUIRE(again.classes.size() == t.classes.size());
    for (std::size_t i = 0; i < t.classes.size(); ++i) {
      CHECK(again.classes[i].id == t.classes[i].id);
      CHECK(again.classes[i].name == t.classes[i].name);
      CHECK(again.classes[i].ignored == t.classes[i].ignored);
    }
  }
}

TEST_CASE("parse_directives: documented examples") {
  const auto t = shipped_taxonomies();
  SUBCASE("person merge") {
    const auto d = ul::parse_directives("merge cityscapes.person sun_rgbd.person -> \"person\"\n", t);
    REQUIRE(d.size() == 1);
    CHECK(d[0].kind == ul::DirectiveKind::kMerge);
    REQUIRE(d[0].operands.size() == 2);
    CHECK(d[0].operands[0] == ul::ClassRef{"cityscapes", 24});
    CHECK(d[0].operands[1] == ul::ClassRef{"sun_rgbd", 31});
    CHECK(*d[0].new_name == "person");
  }
  SUBCASE("wall rename") {
    const auto d = ul::parse_directives("rename cityscapes.wall \"outside wall\"\n", t);
    REQUIRE(d.size() == 1);
    CHECK(d[0].kind == ul::DirectiveKind::kRename);
    CHECK(d[0].operands == std::vector<ul::ClassRef>{{"cityscapes", 12}});
    CHECK(*d[0].new_name == "outside wall");
  }
  SUBCASE("single-dataset merge") {
    CHECK(kind_of([&] { ul::parse_directives("merge cityscapes.person cityscapes.rider -> \"x\"\n", t); }) ==
          ul::ErrorKind::kConflict);
  }
  SUBCASE("unknown references") {
    CHECK(kind_of([&] { ul::parse_directives("rename kitti.road \"r\"\n", t); }) == ul::ErrorKind::kReference);
    CHECK(kind_of([&] { ul::parse_directives("rename cityscapes.lava \"r\"\n", t); }) ==
          ul::ErrorKind::kReference);
    CHECK(message_of([&] { ul::parse_directives("\n\nmap_ignore cityscapes.lava\n", t); }).find("line 3") == 0);
  }
  SUBCASE("ignore classes cannot be operands") {
    CHECK(kind_of([&] { ul::parse_directives("map_ignore sun_rgbd.unlabeled\n", t); }) ==
          ul::ErrorKind::kReference);
  }
  SUBCASE("rename collision") {
    CHECK(kind_of([&] { ul::parse_directives("rename cityscapes.wall \"Sky\"\n", t); }) ==
          ul::ErrorKind::kCollision);
  }
  SUBCASE("multi-word names use underscores") {
    const auto d = ul::parse_directives("map_ignore cityscapes.traffic_light\n", t);
    CHECK(d[0].operands == std::vector<ul::ClassRef>{{"cityscapes", 19}});
  }
  SUBCASE("malformed") {
    for (const char* bad : {"merge cityscapes.person -> \"p\"\n", "merge cityscapes.person sun_rgbd.person\n",
                            "rename cityscapes.wall\n", "rename cityscapes.wall \"\"\n", "explode cityscapes.wall\n",
                            "map_ignore cityscapes.wall extra\n", "rename cityscapes \"x\"\n"}) {
      CAPTURE(bad);
      CHECK(kind_of([&] { ul::parse_directives(bad, t); }) == ul::ErrorKind::kParse);
    }
  }
}

TEST_CASE("merge_label_spaces: shipped fixtures give 27 and 63") {
  const auto two = shipped_taxonomies(false);
  CHECK(ul::merge_label_spaces(two, {}).space.size() == 27);

  const ul::MergeResult m = shipped_merge();
  CHECK(m.space.size() == 63);
  CHECK(m.space.ignore_id == 255);
  // Merged person sits at the position of its first contributor.
  const int person = *m.space.find_by_name("person");
  CHECK(person == 11);  // 12th cityscapes evaluation class
  CHECK(m.space.classes[person].contributors ==
        std::vector<ul::ClassRef>{{"cityscapes", 24}, {"sun_rgbd", 31}});
  CHECK(m.space.find_by_name("outside wall").has_value());
  CHECK(m.space.find_by_name("inside wall").has_value());
  CHECK_FALSE(m.space.find_by_name("wall").has_value());
  // Granularity rule: building, door, window stay separate classes.
  std::set<int> separate{*m.space.find_by_name("building"), *m.space.find_by_name("door"),
                         *m.space.find_by_name("window"), *m.space.find_by_name("inside wall")};
  CHECK(separate.size() == 4);
  // Ignore lines map to 255.
  CHECK(m.class_map.map("cityscapes", 0) == 255);
  CHECK(m.class_map.map("sun_rgbd", 0) == 255);
}

TEST_CASE("merge_label_spaces: single dataset is the identity") {
  const auto t = shipped_taxonomies();
  const std::vector<ul::DatasetTaxonomy> one{t[1]};
  const ul::MergeResult m = ul::merge_label_spaces(one, {});
  REQUIRE(m.space.size() == 8);
  for (int i = 0; i < 8; ++i) {
    CHECK(m.space.classes[i].name == t[1].classes[i].name);
    CHECK(m.class_map.map("suim", i) == i);
  }
}

TEST_CASE("merge_label_spaces: conflicts") {
  const auto t = shipped_taxonomies();
  SUBCASE("merged and map_ignore'd") {
    const auto d = ul::parse_directives(
        "merge cityscapes.person sun_rgbd.person -> \"person\"\nmap_ignore sun_rgbd.person\n", t);
    CHECK(kind_of([&] { ul::merge_label_spaces(t, d); }) == ul::ErrorKind::kConflict);
  }
  SUBCASE("post-merge name collision") {
    // Without the renames, both walls keep the name "wall".
    CHECK(kind_of([&] { ul::merge_label_spaces(t, {}); }) == ul::ErrorKind::kCollision);
    const auto d = ul::parse_directives("merge cityscapes.car suim.fish_and_vertebrates -> \"sky\"\n", t);
    CHECK(kind_of([&] { ul::merge_label_spaces(std::span(t).first(2), d); }) == ul::ErrorKind::kCollision);
  }
  SUBCASE("duplicate dataset") {
    const std::vector<ul::DatasetTaxonomy> twice{t[1], t[1]};
    CHECK(kind_of([&] { ul::merge_label_spaces(twice, {}); }) == ul::ErrorKind::kConflict);
  }
}

TEST_CASE("build_lut: documented examples") {
  SUBCASE("identity over 0..7") {
    const auto t = shipped_taxonomies();
    const std::vector<ul::DatasetTaxonomy> one{t[1]};
    const auto m = ul::merge_label_spaces(one, {});
    const auto lut = ul::Lut::build(m.class_map, "suim", true);
    for (int i = 0; i < 8; ++i) CHECK(lut[static_cast<std::uint8_t>(i)] == i);
    CHECK(lut[255] == 255);
  }
  SUBCASE("person merge shares one universal id") {
    const auto m = shipped_merge();
    const int expected = m.class_map.map("cityscapes", 24);
    CHECK(expected == m.class_map.map("sun_rgbd", 31));
    CHECK(ul::Lut::build(m.class_map, "cityscapes", true)[24] == expected);
    CHECK(ul::Lut::build(m.class_map, "sun_rgbd", true)[31] == expected);
  }
  SUBCASE("lenient and strict undeclared ids") {
    const auto m = shipped_merge();
    const auto lenient = ul::Lut::build(m.class_map, "cityscapes", false);
    CHECK(lenient[200] == 255);
    const auto strict = ul::Lut::build(m.class_map, "cityscapes", true);
    CHECK_FALSE(strict.declared(200));
    CHECK(strict.declared(24));
    CHECK(strict.declared(255));
  }
  SUBCASE("unknown dataset") {
    CHECK(kind_of([] { ul::Lut::build(shipped_merge().class_map, "kitti", true); }) == ul::ErrorKind::kReference);
  }
}

TEST_CASE("universal label-space JSON round trip") {
  const auto m = shipped_merge();
  const std::string text = ul::to_json(m);
  const auto again = ul::merge_result_from_json(text);
  CHECK(again == m);
  CHECK(ul::to_json(again) == text);
  CHECK(kind_of([] { ul::merge_result_from_json("{\"classes\": 3}"); }) == ul::ErrorKind::kParse);
  CHECK(kind_of([] { ul::merge_result_from_json("not json"); }) == ul::ErrorKind::kParse);
}

// ---------------------------------------------------------------------------
// Property tests over random taxonomies and random valid directive sets.

namespace {

struct RandomCase {
  std::vector<ul::DatasetTaxonomy> taxonomies;
  std::string directives;
  std::size_t merge_reduction = 0;
  std::size_t map_ignored = 0;
  std::set<ul::ClassRef> ignored_refs;  // map_ignore operands
};

RandomCase random_case(std::mt19937_64& rng) {
  RandomCase rc;
  std::uniform_int_distribution<int> n_datasets(1, 4), n_classes(1, 12), coin(0, 3);
  const int nd = n_datasets(rng);
  std::vector<ul::ClassRef> pool;
  for (int d = 0; d < nd; ++d) {
    std::string text = "dataset ds" + std::to_string(d) + "\n";
    std::vector<int> ids(255);
    for (int i = 0; i < 255; ++i) ids[i] = i;
    std::shuffle(ids.begin(), ids.end(), rng);
    const int n = n_classes(rng);
    for (int j = 0; j < n; ++j) {
      text += "class " + std::to_string(ids[j]) + " \"d" + std::to_string(d) + " c" + std::to_string(ids[j]) + "\"\n";
      pool.push_back({"ds" + std::to_string(d), ids[j]});
    }
    if (coin(rng) == 0) text += "ignore " + std::to_string(ids[n]) + " \"void\"\n";
    rc.taxonomies.push_back(ul::parse_taxonomy(text));
  }
  std::shuffle(pool.begin(), pool.end(), rng);
  auto token = [](const ul::ClassRef& r) {
    return r.dataset_id + ".d" + r.dataset_id.substr(2) + "_c" + std::to_string(r.local_id);
  };
  int fresh = 0;
  std::size_t i = 0;
  while (i < pool.size()) {
    const int action = coin(rng);
    if (action == 0 && i + 1 < pool.size()) {
      // Merge a run of operands from distinct datasets.
      std::vector<ul::ClassRef> ops{pool[i]};
      std::size_t j = i + 1;
      while (j < pool.size() && ops.size() < 3) {
        const bool distinct = std::none_of(ops.begin(), ops.end(),
                                           [&](const ul::ClassRef& o) { return o.dataset_id == pool[j].dataset_id; });
        if (!distinct) break;
        ops.push_back(pool[j++]);
      }
      if (ops.size() >= 2) {
        rc.directives += "merge";
        for (const auto& o : ops) rc.directives += " " + token(o);
        rc.directives += " -> \"merged " + std::to_string(fresh++) + "\"\n";
        rc.merge_reduction += ops.size() - 1;
        i = j;
        continue;
      }
    } else if (action == 1) {
      rc.directives += "map_ignore " + token(pool[i]) + "\n";
      rc.ignored_refs.insert(pool[i]);
      ++rc.map_ignored;
    } else if (action == 2) {
      rc.directives += "rename " + token(pool[i]) + " \"renamed " + std::to_string(fresh++) + "\"\n";
    }
    ++i;
  }
  return rc;
}

}  // namespace

TEST_CASE("property: class count, totality, partition, determinism, round trip") {
  std::mt19937_64 rng(20260101);
  for (int trial = 0; trial < 300; ++trial) {
    const RandomCase rc = random_case(rng);
    CAPTURE(rc.directives);
    const auto directives = ul::parse_directives(rc.directives, rc.taxonomies);
    const ul::MergeResult m = ul::merge_label_spaces(rc.taxonomies, directives);

    std::size_t eval_total = 0;
    for (const auto& t : rc.taxonomies) eval_total += t.evaluation_class_count();
    CHECK(m.space.size() == eval_total - rc.merge_reduction - rc.map_ignored);

    // Ids are 0..K-1 in order; names pairwise distinct.
    std::set<std::string> names;
    for (std::size_t u = 0; u < m.space.size(); ++u) {
      CHECK(m.space.classes[u].id == static_cast<int>(u));
      names.insert(ul::normalize_name(m.space.classes[u].name));
    }
    CHECK(names.size() == m.space.size());

    // Contributors partition the non-ignored, non-map_ignore'd classes.
    std::multiset<ul::ClassRef> contributors;
    for (const auto& u : m.space.classes) contributors.insert(u.contributors.begin(), u.contributors.end());
    std::multiset<ul::ClassRef> expected;
    for (const auto& t : rc.taxonomies) {
      for (const auto& c : t.classes) {
        if (!c.ignored && !rc.ignored_refs.contains({t.dataset_id, c.id})) expected.insert({t.dataset_id, c.id});
      }
    }
    CHECK(contributors == expected);

    // ClassMap is total and functional, and agrees with the contributor lists.
    for (const auto& t : rc.taxonomies) {
      const auto& slice = m.class_map.at(t.dataset_id);
      CHECK(slice.entries.size() == t.classes.size());
      for (const auto& c : t.classes) {
        const int u = m.class_map.map(t.dataset_id, c.id);
        CHECK(u == oracle_map(m, t, c.id));
        if (c.ignored || rc.ignored_refs.contains({t.dataset_id, c.id})) CHECK(u == 255);
      }
    }

    // First-occurrence order over (dataset order, local id).
    std::vector<int> first_seen;
    for (const auto& t : rc.taxonomies) {
      std::vector<int> ids;
      for (const auto& c : t.classes) ids.push_back(c.id);
      std::sort(ids.begin(), ids.end());
      for (int id : ids) {
        const int u = m.class_map.map(t.dataset_id, id);
        if (u != 255 && std::find(first_seen.begin(), first_seen.end(), u) == first_seen.end()) {
          first_seen.push_back(u);
        }
      }
    }
    for (std::size_t u = 0; u < first_seen.size(); ++u) CHECK(first_seen[u] == static_cast<int>(u));

    CHECK(ul::merge_label_spaces(rc.taxonomies, directives) == m);
    CHECK(ul::merge_result_from_json(ul::to_json(m)) == m);
  }
}
