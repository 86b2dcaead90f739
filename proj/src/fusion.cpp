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

#include "fsmr/fusion.hpp"

#include <numeric>

#include "fsmr/errors.hpp"
#include "fsmr/ops.hpp"
#include "fsmr/rng.hpp"

namespace fsmr {

std::string_view to_string(SwapStrategy s) {
  switch (s) {
    case SwapStrategy::kNone: return "none";
    case SwapStrategy::kImageToText: return "imagetotext";
    case SwapStrategy::kTextToImage: return "texttoimage";
    case SwapStrategy::kBidirectional: return "bidirectional";
    case SwapStrategy::kHybrid: return "hybrid";
  }
  return "?";
}

SwapStrategy parse_swap_strategy(std::string_view s) {
  if (s == "none") return SwapStrategy::kNone;
  if (s == "imagetotext" || s == "image_to_text") return SwapStrategy::kImageToText;
  if (s == "texttoimage" || s == "text_to_image") return SwapStrategy::kTextToImage;
  if (s == "bidirectional") return SwapStrategy::kBidirectional;
  if (s == "hybrid") return SwapStrategy::kHybrid;
  throw ConfigError("unknown swap_strategy '" + std::string(s) + "'");
}

SwapStrategy sample_hybrid(Rng& rng) {
  static constexpr SwapStrategy kChoices[] = {SwapStrategy::kNone, SwapStrategy::kImageToText,
                                              SwapStrategy::kTextToImage,
                                              SwapStrategy::kBidirectional};
  return kChoices[rng.index(4)];
}

SwapPlan plan_swap(std::size_t n, std::size_t m, std::span<const AlignmentPair> pairs,
                   SwapStrategy strategy) {
  if (strategy == SwapStrategy::kHybrid) {
    throw ConfigError("hybrid swap must be resolved to a concrete strategy first");
  }
  for (const auto& p : pairs) {
    if (p.word_position >= n || p.object_index >= m) {
      throw DataError("alignment pair (" + std::to_string(p.word_position) + ", " +
                      std::to_string(p.object_index) + ") out of range for " + std::to_string(n) +
                      " words and " + std::to_string(m) + " objects");
    }
  }
  SwapPlan plan;
  plan.word_rows.resize(n);
  plan.object_rows.resize(m);
  std::iota(plan.word_rows.begin(), plan.word_rows.end(), std::size_t{0});
  std::iota(plan.object_rows.begin(), plan.object_rows.end(), n);

  const bool into_words =
      strategy == SwapStrategy::kImageToText || strategy == SwapStrategy::kBidirectional;
  const bool into_objects =
      strategy == SwapStrategy::kTextToImage || strategy == SwapStrategy::kBidirectional;
  std::vector<bool> object_taken(m, false);
  for (const auto& p : pairs) {
    if (into_words) {
      plan.word_rows[p.word_position] = n + p.object_index;
      plan.words_identity = false;
    }
    if (into_objects && !object_taken[p.object_index]) {
      object_taken[p.object_index] = true;
      plan.object_rows[p.object_index] = p.word_position;
      plan.objects_identity = false;
    }
  }
  return plan;
}

SwappedPair swap_features(const Tensor& words, const Tensor& objects,
                          std::span<const AlignmentPair> pairs, SwapStrategy strategy, Rng& rng) {
  if (words.cols() != objects.cols()) {
    throw ShapeError("word width " + std::to_string(words.cols()) + " differs from object width " +
                     std::to_string(objects.cols()));
  }
  if (strategy == SwapStrategy::kHybrid) strategy = sample_hybrid(rng);
  const std::size_t n = words.rows(), m = objects.rows(), d = words.cols();
  const SwapPlan plan = plan_swap(n, m, pairs, strategy);
  auto source_row = [&](std::size_t r) {
    return r < n ? words.row_span(r) : objects.row_span(r - n);
  };
  SwappedPair out{Tensor({n, d}), Tensor({m, d})};
  for (std::size_t i = 0; i < n; ++i) {
    auto src = source_row(plan.word_rows[i]);
    std::copy(src.begin(), src.end(), out.h_w.row_span(i).begin());
  }
  for (std::size_t j = 0; j < m; ++j) {
    auto src = source_row(plan.object_rows[j]);
    std::copy(src.begin(), src.end(), out.h_v.row_span(j).begin());
  }
  return out;
}

SwappedVars swap_features(Var words, Var objects, std::span<const AlignmentPair> pairs,
                          SwapStrategy strategy) {
  const SwapPlan plan = plan_swap(words.rows(), objects.rows(), pairs, strategy);
  if (plan.words_identity && plan.objects_identity) return {words, objects};
  Var stacked = ops::concat_rows({words, objects});
  SwappedVars out{words, objects};
  if (!plan.words_identity) out.h_w = ops::gather_rows(stacked, plan.word_rows);
  if (!plan.objects_identity) out.h_v = ops::gather_rows(stacked, plan.object_rows);
  return out;
}

Var align(Var h_cls, Var h_img, Var w, Var b) {
  return ops::tanh(ops::linear(ops::concat_cols({h_cls, h_img}), w, b));
}

}  // namespace fsmr
