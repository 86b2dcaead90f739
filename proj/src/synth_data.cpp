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

#include "fsmr/synth_data.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "fsmr/errors.hpp"
#include "fsmr/rng.hpp"

namespace fsmr {

void GenConfig::validate() const {
  if (num_relations < 2) throw ConfigError("num_relations must be >= 2");
  if (num_attributes < 2) throw ConfigError("num_attributes must be >= 2");
  if (min_entities < 2 || max_entities < min_entities) {
    throw ConfigError("entity counts must satisfy 2 <= min_entities <= max_entities");
  }
  if (max_entities > num_entity_types) {
    throw ConfigError("max_entities exceeds num_entity_types");
  }
  if (num_attributes > d_visual) {
    throw ConfigError("num_attributes (" + std::to_string(num_attributes) +
                      ") exceeds d_visual (" + std::to_string(d_visual) + ")");
  }
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
}

namespace {

std::size_t other_than(std::size_t value, std::size_t count, Rng& rng) {
  const std::size_t draw = rng.index(count - 1);
  return draw >= value ? draw + 1 : draw;
}

std::string instance_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "syn-%06zu", i);
  return buf;
}

}  // namespace

Dataset generate(const GenConfig& cfg) {
  cfg.validate();
  const TokenLayout tok = cfg.layout();
  Rng rng(cfg.seed, "synth_data");
  Dataset out;
  out.reserve(cfg.num_instances);
  for (std::size_t i = 0; i < cfg.num_instances; ++i) {
    Instance inst;
    inst.id = instance_id(i);

    const std::size_t k = cfg.min_entities + rng.index(cfg.max_entities - cfg.min_entities + 1);
    std::vector<std::size_t> pool(cfg.num_entity_types);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    rng.shuffle(pool);
    std::vector<std::size_t> entities(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));

    // One object per entity; its attribute is visible only in the feature.
    std::vector<std::size_t> attribute(k);
    inst.objects.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      attribute[j] = rng.index(cfg.num_attributes);
      ObjectRegion& o = inst.objects[j];
      o.entity_id = static_cast<int>(entities[j]);
      o.feature.assign(cfg.d_visual, 0.0);
      o.feature[attribute[j]] = cfg.feature_scale;
      if (cfg.noise_sigma > 0.0)
        for (double& v : o.feature) v += rng.normal(0.0, cfg.noise_sigma);
    }

    const std::size_t a_obj = rng.index(k);
    const std::size_t b_obj = other_than(a_obj, k, rng);
    const std::size_t relation = rng.index(cfg.num_relations);
    const std::size_t x_obj = rng.index(k);

    inst.premise = {tok.entity_token(entities[a_obj]), tok.relation_token(relation),
                    tok.entity_token(entities[b_obj])};

    struct Draft {
      Category category;
      std::vector<int> tokens;
    };
    std::vector<Draft> drafts;
    for (Category c : {Category::kAT, Category::kD1, Category::kAF, Category::kD2}) {
      const bool text_true = c == Category::kAT || c == Category::kD1;
      const bool image_true = c == Category::kAT || c == Category::kAF;
      const std::size_t r = text_true ? relation : other_than(relation, cfg.num_relations, rng);
      const std::size_t a =
          image_true ? attribute[x_obj] : other_than(attribute[x_obj], cfg.num_attributes, rng);
      drafts.push_back({c,
                        {tok.entity_token(entities[a_obj]), tok.relation_token(r),
                         tok.entity_token(entities[b_obj]), tok.entity_token(entities[x_obj]),
                         tok.attribute_token(a)}});
    }
    rng.shuffle(drafts);

    // Entity mentions: premise positions 0 and 2, candidate positions 0, 2, 3.
    const std::size_t l1 = inst.premise.size();
    const std::vector<AlignmentPair> pairs = {
        {0, a_obj}, {2, b_obj}, {l1 + 0, a_obj}, {l1 + 2, b_obj}, {l1 + 3, x_obj}};
    for (std::size_t c = 0; c < kNumCandidates; ++c) {
      inst.candidates[c] = std::move(drafts[c].tokens);
      inst.categories[c] = drafts[c].category;
      inst.alignments[c] = pairs;
      if (drafts[c].category == Category::kAT) inst.answer = c;
    }
    out.push_back(std::move(inst));
  }
  return out;
}

namespace {

void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

template <class Range>
void append_int_array(std::string& out, const Range& values) {
  out += '[';
  bool first = true;
  for (auto v : values) {
    if (!first) out += ',';
    first = false;
    out += std::to_string(v);
  }
  out += ']';
}

}  // namespace

std::string to_json_line(const Instance& inst) {
  std::string out = "{\"id\":";
  out += nlohmann::json(inst.id).dump();
  out += ",\"premise\":";
  append_int_array(out, inst.premise);
  out += ",\"candidates\":[";
  for (std::size_t c = 0; c < kNumCandidates; ++c) {
    if (c) out += ',';
    append_int_array(out, inst.candidates[c]);
  }
  out += "],\"objects\":[";
  for (std::size_t j = 0; j < inst.objects.size(); ++j) {
    if (j) out += ',';
    out += "{\"entity\":" + std::to_string(inst.objects[j].entity_id) + ",\"feat\":[";
    for (std::size_t f = 0; f < inst.objects[j].feature.size(); ++f) {
      if (f) out += ',';
      append_double(out, inst.objects[j].feature[f]);
    }
    out += "]}";
  }
  out += "],\"alignments\":[";
  for (std::size_t c = 0; c < kNumCandidates; ++c) {
    if (c) out += ',';
    out += '[';
    for (std::size_t p = 0; p < inst.alignments[c].size(); ++p) {
      if (p) out += ',';
      out += '[' + std::to_string(inst.alignments[c][p].word_position) + ',' +
             std::to_string(inst.alignments[c][p].object_index) + ']';
    }
    out += ']';
  }
  out += "],\"answer\":" + std::to_string(inst.answer) + ",\"categories\":[";
  for (std::size_t c = 0; c < kNumCandidates; ++c) {
    if (c) out += ',';
    out += '"';
    out += to_string(inst.categories[c]);
    out += '"';
  }
  out += "]}";
  return out;
}

namespace {

using nlohmann::json;

struct LineContext {
  std::size_t line;
  [[noreturn]] void schema(const std::string& field, const std::string& why) const {
    throw SchemaError("line " + std::to_string(line) + ": field \"" + field + "\" " + why);
  }
  const json& field(const json& obj, const char* name) const {
    auto it = obj.find(name);
    if (it == obj.end()) schema(name, "is missing");
    return *it;
  }
  int as_int(const json& v, const std::string& name) const {
    if (!v.is_number_integer()) schema(name, "must be an integer");
    return v.get<int>();
  }
  std::size_t as_index(const json& v, const std::string& name) const {
    if (!v.is_number_unsigned()) schema(name, "must be a non-negative integer");
    return v.get<std::size_t>();
  }
  std::vector<int> int_array(const json& v, const std::string& name) const {
    if (!v.is_array()) schema(name, "must be an array of integers");
    std::vector<int> out;
    for (const auto& e : v) out.push_back(as_int(e, name));
    return out;
  }
  const json& fixed_array(const json& v, const std::string& name) const {
    if (!v.is_array() || v.size() != kNumCandidates) {
      schema(name, "must be an array of " + std::to_string(kNumCandidates) + " entries");
    }
    return v;
  }
};

}  // namespace

Instance parse_json_line(const std::string& line, std::size_t line_number) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError("line " + std::to_string(line_number) + ": malformed JSON (" + e.what() + ")");
  }
  const LineContext ctx{line_number};
  if (!doc.is_object()) throw ParseError("line " + std::to_string(line_number) + ": not a JSON object");

  Instance inst;
  const json& id = ctx.field(doc, "id");
  if (!id.is_string()) ctx.schema("id", "must be a string");
  inst.id = id.get<std::string>();
  inst.premise = ctx.int_array(ctx.field(doc, "premise"), "premise");

  const json& cands = ctx.fixed_array(ctx.field(doc, "candidates"), "candidates");
  for (std::size_t c = 0; c < kNumCandidates; ++c) inst.candidates[c] = ctx.int_array(cands[c], "candidates");

  const json& objects = ctx.field(doc, "objects");
  if (!objects.is_array()) ctx.schema("objects", "must be an array");
  for (const auto& o : objects) {
    if (!o.is_object()) ctx.schema("objects", "entries must be objects");
    ObjectRegion region;
    region.entity_id = ctx.as_int(ctx.field(o, "entity"), "entity");
    const json& feat = ctx.field(o, "feat");
    if (!feat.is_array()) ctx.schema("feat", "must be an array of numbers");
    for (const auto& v : feat) {
      if (!v.is_number()) ctx.schema("feat", "must be an array of numbers");
      region.feature.push_back(v.get<double>());
    }
    inst.objects.push_back(std::move(region));
  }

  const json& aligns = ctx.fixed_array(ctx.field(doc, "alignments"), "alignments");
  for (std::size_t c = 0; c < kNumCandidates; ++c) {
    if (!aligns[c].is_array()) ctx.schema("alignments", "entries must be arrays of pairs");
    for (const auto& p : aligns[c]) {
      if (!p.is_array() || p.size() != 2) ctx.schema("alignments", "pairs must be [word_pos, obj_idx]");
      inst.alignments[c].push_back(
          {ctx.as_index(p[0], "alignments"), ctx.as_index(p[1], "alignments")});
    }
  }

  inst.answer = ctx.as_index(ctx.field(doc, "answer"), "answer");

  const json& cats = ctx.fixed_array(ctx.field(doc, "categories"), "categories");
  for (std::size_t c = 0; c < kNumCandidates; ++c) {
    if (!cats[c].is_string()) ctx.schema("categories", "entries must be strings");
    auto cat = parse_category(cats[c].get<std::string>());
    if (!cat) ctx.schema("categories", "entries must be one of AT, D1, AF, D2");
    inst.categories[c] = *cat;
  }
  return inst;
}

void write_jsonl(const Dataset& data, const std::filesystem::path& path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + tmp.string() + "' for writing");
    for (const auto& inst : data) out << to_json_line(inst) << '\n';
    out.flush();
    if (!out) throw DataError("failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

Dataset read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
  Dataset data;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty() || line == "\r") continue;
    data.push_back(parse_json_line(line, line_number));
  }
  return data;
}

Consistency candidate_consistency(const Instance& inst, std::size_t candidate,
                                  const TokenLayout& layout) {
  const auto& tokens = inst.candidates[candidate];
  if (inst.premise.size() != kPremiseLength || tokens.size() != kCandidateLength) {
    throw DataError("instance '" + inst.id + "' does not follow the synthetic token layout");
  }
  Consistency out;
  out.premise = tokens[1] == inst.premise[1];

  const std::size_t mention = kPremiseLength + 3;
  const auto& pairs = inst.alignments[candidate];
  auto it = std::find_if(pairs.begin(), pairs.end(),
                         [&](const AlignmentPair& p) { return p.word_position == mention; });
  if (it == pairs.end() || it->object_index >= inst.objects.size()) {
    throw DataError("instance '" + inst.id + "' lacks an alignment for the attribute subject");
  }
  const auto& feat = inst.objects[it->object_index].feature;
  if (feat.size() < layout.attributes) {
    throw DataError("instance '" + inst.id + "' has features narrower than the attribute count");
  }
  const auto best = std::max_element(feat.begin(), feat.begin() + static_cast<std::ptrdiff_t>(layout.attributes));
  const int seen = layout.attribute_token(static_cast<std::size_t>(best - feat.begin()));
  out.image = tokens[4] == seen;
  return out;
}

Ceilings oracle_ceilings(const Dataset& data, const TokenLayout& layout) {
  if (data.empty()) throw DataError("oracle ceilings need a non-empty dataset");
  Ceilings sum;
  for (const auto& inst : data) {
    std::size_t at_count = 0;
    std::size_t text_set = 0, image_set = 0, full_set = 0;
    bool at_text = false, at_image = false, at_full = false;
    for (std::size_t c = 0; c < kNumCandidates; ++c) {
      const Consistency k = candidate_consistency(inst, c, layout);
      const Category cat = inst.categories[c];
      const bool want_premise = cat == Category::kAT || cat == Category::kD1;
      const bool want_image = cat == Category::kAT || cat == Category::kAF;
      if (k.premise != want_premise || k.image != want_image) {
        throw DataError("instance '" + inst.id + "': candidate " + std::to_string(c) +
                        " contradicts its category tag " + std::string(to_string(cat)));
      }
      const bool is_at = cat == Category::kAT;
      at_count += is_at;
      text_set += k.premise;
      image_set += k.image;
      full_set += k.premise && k.image;
      at_text = at_text || (is_at && k.premise);
      at_image = at_image || (is_at && k.image);
      at_full = at_full || (is_at && k.premise && k.image);
    }
    if (at_count != 1) throw DataError("instance '" + inst.id + "' lacks a unique AT tag");
    // Ideal classifiers pick uniformly among candidates they judge consistent.
    sum.text_only += at_text ? 1.0 / static_cast<double>(text_set) : 0.0;
    sum.image_only += at_image ? 1.0 / static_cast<double>(image_set) : 0.0;
    sum.full += at_full ? 1.0 / static_cast<double>(full_set) : 0.0;
  }
  const double n = static_cast<double>(data.size());
  return {sum.text_only / n, sum.image_only / n, sum.full / n};
}

}  // namespace fsmr
