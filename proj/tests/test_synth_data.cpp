// Copyright 2026 The FSMR Authors
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

#include <filesystem>
#include <fstream>
#include <set>

#include "fsmr/errors.hpp"
#include "fsmr/synth_data.hpp"

using namespace fsmr;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "fsmr_unit";
  std::filesystem::create_directories(dir);
  return dir / name;
}

// Independent judgement of a candidate from its tokens and the object features.
std::pair<bool, bool> judge(const Instance& inst, std::size_t c, const TokenLayout& layout) {
  const auto& tok = inst.candidates[c];
  const bool premise_ok = tok[1] == inst.premise[1];
  std::size_t subject = inst.objects.size();
  for (const auto& p : inst.alignments[c])
    if (p.word_position == kPremiseLength + 3) subject = p.object_index;
  REQUIRE(subject < inst.objects.size());
  const auto& f = inst.objects[subject].feature;
  std::size_t best = 0;
  for (std::size_t a = 1; a < layout.attributes; ++a)
    if (f[a] > f[best]) best = a;
  const bool image_ok = tok[4] == layout.attribute_token(best);
  return {premise_ok, image_ok};
}

}  // namespace

TEST_CASE("generated instances follow the construction") {
  GenConfig cfg;
  cfg.num_instances = 300;
  cfg.seed = 4;
  const Dataset data = generate(cfg);
  REQUIRE(data.size() == 300);
  const TokenLayout layout = cfg.layout();
  std::set<std::string> ids;
  for (const auto& inst : data) {
    ids.insert(inst.id);
    CHECK(inst.premise.size() == kPremiseLength);
    CHECK(inst.objects.size() >= cfg.min_entities);
    CHECK(inst.objects.size() <= cfg.max_entities);
    std::array<int, 4> per_category{};
    for (std::size_t c = 0; c < kNumCandidates; ++c) {
      CHECK(inst.candidates[c].size() == kCandidateLength);
      ++per_category[static_cast<std::size_t>(inst.categories[c])];
      for (const auto& p : inst.alignments[c]) {
        CHECK(p.object_index < inst.objects.size());
        CHECK(p.word_position < inst.word_count(c));
        const int tok = p.word_position < kPremiseLength
                            ? inst.premise[p.word_position]
                            : inst.candidates[c][p.word_position - kPremiseLength];
        CHECK(tok >= 0);
        CHECK(static_cast<std::size_t>(tok) < layout.entities);
        CHECK(inst.objects[p.object_index].entity_id == tok);
      }
      const auto [premise_ok, image_ok] = judge(inst, c, layout);
      const Category cat = inst.categories[c];
      CHECK(premise_ok == (cat == Category::kAT || cat == Category::kD1));
      CHECK(image_ok == (cat == Category::kAT || cat == Category::kAF));
    }
    CHECK(per_category == std::array<int, 4>{1, 1, 1, 1});
    CHECK(inst.categories[inst.answer] == Category::kAT);
  }
  CHECK(ids.size() == data.size());
}

TEST_CASE("generation is deterministic and seed-sensitive") {
  GenConfig cfg;
  cfg.num_instances = 50;
  CHECK(generate(cfg) == generate(cfg));
  GenConfig other = cfg;
  other.seed = 1;
  CHECK(generate(cfg) != generate(other));
}

TEST_CASE("noise-free features depend only on the facts") {
  GenConfig cfg;
  cfg.num_instances = 400;
  cfg.noise_sigma = 0.0;
  const Dataset data = generate(cfg);
  for (const auto& inst : data)
    for (const auto& o : inst.objects) {
      double sum = 0.0;
      int hot = 0;
      for (double v : o.feature) {
        sum += v;
        hot += v != 0.0;
      }
      CHECK(hot == 1);
      CHECK(sum == cfg.feature_scale);
    }
}

TEST_CASE("oracle ceilings") {
  GenConfig cfg;
  cfg.num_instances = 200;
  const Dataset data = generate(cfg);
  const Ceilings c = oracle_ceilings(data, cfg.layout());
  CHECK(c.full == 1.0);
  CHECK(c.text_only == 0.5);
  CHECK(c.image_only == 0.5);

  Dataset tampered = data;
  std::swap(tampered[0].categories[0], tampered[0].categories[1]);
  CHECK_THROWS_AS(oracle_ceilings(tampered, cfg.layout()), DataError);
  CHECK_THROWS_AS(oracle_ceilings(Dataset{}, cfg.layout()), DataError);
}

TEST_CASE("jsonl round trip") {
  GenConfig cfg;
  cfg.num_instances = 100;
  cfg.noise_sigma = 0.3;
  const Dataset data = generate(cfg);
  const auto path = temp_path("roundtrip.jsonl");
  write_jsonl(data, path);
  CHECK(read_jsonl(path) == data);

  const auto empty = temp_path("empty.jsonl");
  write_jsonl({}, empty);
  CHECK(std::filesystem::file_size(empty) == 0);
  CHECK(read_jsonl(empty).empty());
}

TEST_CASE("jsonl errors") {
  GenConfig cfg;
  cfg.num_instances = 1;
  const std::string line = to_json_line(generate(cfg)[0]);
  CHECK(parse_json_line(line, 1) == generate(cfg)[0]);

  try {
    parse_json_line("{\"id\": ", 7);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 7") != std::string::npos);
  }

  const auto at = line.find("\"objects\"");
  REQUIRE(at != std::string::npos);
  std::string missing = line;
  missing.replace(at, 9, "\"objectz\"");
  try {
    parse_json_line(missing, 3);
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("\"objects\"") != std::string::npos);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  const auto path = temp_path("broken.jsonl");
  {
    std::ofstream out(path);
    out << line << "\n" << "not json\n";
  }
  try {
    read_jsonl(path);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(read_jsonl(temp_path("does-not-exist.jsonl")), DataError);
}

TEST_CASE("generator config validation") {
  GenConfig cfg;
  cfg.min_entities = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = GenConfig{};
  cfg.max_entities = 9;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = GenConfig{};
  cfg.num_attributes = 17;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
