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

#include "fsmr/instance.hpp"

#include <cmath>
#include <set>

#include "fsmr/errors.hpp"

namespace fsmr {

std::string_view to_string(Category c) {
  switch (c) {
    case Category::kAT: return "AT";
    case Category::kD1: return "D1";
    case Category::kAF: return "AF";
    case Category::kD2: return "D2";
  }
  return "?";
}

std::optional<Category> parse_category(std::string_view s) {
  if (s == "AT") return Category::kAT;
  if (s == "D1") return Category::kD1;
  if (s == "AF") return Category::kAF;
  if (s == "D2") return Category::kD2;
  return std::nullopt;
}

void validate_instance(const Instance& inst, std::size_t max_sequence_length) {
  auto fail = [&](const std::string& why) {
    throw DataError("instance '" + inst.id + "': " + why);
  };
  if (inst.objects.empty()) fail("instance has no objects");
  const std::size_t dv = inst.objects[0].feature.size();
  for (const auto& o : inst.objects) {
    if (o.feature.size() != dv) fail("object feature dimensions differ");
    for (double v : o.feature)
      if (!std::isfinite(v)) fail("non-finite object feature");
  }
  if (inst.answer >= kNumCandidates) fail("answer index out of range");
  std::size_t at_count = 0;
  for (std::size_t c = 0; c < kNumCandidates; ++c) {
    if (inst.categories[c] == Category::kAT) ++at_count;
    const std::size_t n = inst.word_count(c);
    if (n > max_sequence_length) {
      fail("candidate " + std::to_string(c) + " has " + std::to_string(n) +
           " words, above the maximum sequence length " + std::to_string(max_sequence_length));
    }
    std::set<std::size_t> seen;
    for (const auto& p : inst.alignments[c]) {
      if (p.word_position >= n || p.object_index >= inst.objects.size()) {
        fail("alignment (" + std::to_string(p.word_position) + ", " +
             std::to_string(p.object_index) + ") out of range for candidate " +
             std::to_string(c));
      }
      if (!seen.insert(p.word_position).second) {
        fail("duplicate alignment word position " + std::to_string(p.word_position));
      }
    }
  }
  if (at_count != 1) fail("expected exactly one AT candidate");
  if (inst.categories[inst.answer] != Category::kAT) fail("answer does not point to the AT candidate");
}

}  // namespace fsmr
