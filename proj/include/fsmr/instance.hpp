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

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fsmr {

inline constexpr std::size_t kNumCandidates = 4;

/// Relationship of a candidate to the premise and to the image:
/// AT true for both, D1 premise-true/image-false, AF premise-false/image-true,
/// D2 false for both.
enum class Category { kAT = 0, kD1 = 1, kAF = 2, kD2 = 3 };

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view s);

struct ObjectRegion {
  int entity_id = 0;
  std::vector<double> feature;

  bool operator==(const ObjectRegion&) const = default;
};

/// Word position indexes the concatenated premise + candidate tokens.
struct AlignmentPair {
  std::size_t word_position = 0;
  std::size_t object_index = 0;

  bool operator==(const AlignmentPair&) const = default;
};

struct Instance {
  std::string id;
  std::vector<int> premise;
  std::array<std::vector<int>, kNumCandidates> candidates;
  std::vector<ObjectRegion> objects;
  std::array<std::vector<AlignmentPair>, kNumCandidates> alignments;
  std::size_t answer = 0;
  std::array<Category, kNumCandidates> categories{};

  std::size_t word_count(std::size_t candidate) const {
    return premise.size() + candidates[candidate].size();
  }
  std::size_t visual_dim() const { return objects.empty() ? 0 : objects[0].feature.size(); }

  bool operator==(const Instance&) const = default;
};

using Dataset = std::vector<Instance>;

/// Checks the structural invariants of an instance; throws DataError
/// naming the instance and the violated rule.
void validate_instance(const Instance& inst, std::size_t max_sequence_length);

}  // namespace fsmr
