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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "fsmr/instance.hpp"

namespace fsmr {

/// Token id layout: entity tokens, then relation tokens, then attribute
/// tokens.
struct TokenLayout {
  std::size_t entities = 8;
  std::size_t relations = 4;
  std::size_t attributes = 4;

  int entity_token(std::size_t e) const { return static_cast<int>(e); }
  int relation_token(std::size_t r) const { return static_cast<int>(entities + r); }
  int attribute_token(std::size_t a) const { return static_cast<int>(entities + relations + a); }
  std::size_t vocab_size() const { return entities + relations + attributes; }
};

struct GenConfig {
  std::size_t num_instances = 100;
  std::size_t min_entities = 2;
  std::size_t max_entities = 4;
  std::size_t num_entity_types = 8;
  std::size_t num_relations = 4;   // R
  std::size_t num_attributes = 4;  // A
  std::size_t d_visual = 16;
  double noise_sigma = 0.05;
  double feature_scale = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  TokenLayout layout() const { return {num_entity_types, num_relations, num_attributes}; }
};

/// Premise length and candidate length of every generated instance.
inline constexpr std::size_t kPremiseLength = 3;    // [ea, r, eb]
inline constexpr std::size_t kCandidateLength = 5;  // [ea, r', eb, ex, a']

/// Each instance holds one textual fact (ea r eb), stated only in the
/// premise, and one visual fact (ex has attribute a), present only in
/// the object features. The four candidates restate both facts, each
/// either truly or with a substituted id, realizing AT/D1/AF/D2.
Dataset generate(const GenConfig& cfg);

std::string to_json_line(const Instance& inst);
/// Throws ParseError (malformed JSON) or SchemaError (missing or mistyped
/// field), both naming `line_number`.
Instance parse_json_line(const std::string& line, std::size_t line_number);

/// Atomic write through a temporary file and rename.
void write_jsonl(const Dataset& data, const std::filesystem::path& path);
Dataset read_jsonl(const std::filesystem::path& path);

struct Consistency {
  bool premise = false;
  bool image = false;
};

/// Checks a candidate against the premise tokens and the object features.
Consistency candidate_consistency(const Instance& inst, std::size_t candidate,
                                  const TokenLayout& layout);

struct Ceilings {
  double text_only = 0.0;
  double image_only = 0.0;
  double full = 0.0;
};

/// Best expected selection accuracy of ideal classifiers restricted to the
/// premise, the image, or both, with uniform tie-breaking among candidates
/// they cannot separate.
Ceilings oracle_ceilings(const Dataset& data, const TokenLayout& layout);

}  // namespace fsmr
