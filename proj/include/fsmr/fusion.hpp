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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fsmr/instance.hpp"
#include "fsmr/tape.hpp"

namespace fsmr {

class Rng;

enum class SwapStrategy { kNone, kImageToText, kTextToImage, kBidirectional, kHybrid };

/// Config names: none, imagetotext, texttoimage, bidirectional, hybrid.
std::string_view to_string(SwapStrategy s);
/// Also accepts snake_case spellings (image_to_text). Throws ConfigError.
SwapStrategy parse_swap_strategy(std::string_view s);

/// Uniform draw among None, ImageToText, TextToImage and Bidirectional.
SwapStrategy sample_hybrid(Rng& rng);

/// Row sources for the swapped matrices. Indices address the stacked
/// matrix [words; objects], so object j lives at row n + j.
struct SwapPlan {
  std::vector<std::size_t> word_rows;
  std::vector<std::size_t> object_rows;
  bool words_identity = true;
  bool objects_identity = true;
};

/// Builds the simultaneous swap: every source row is read from the original
/// matrices. When several pairs share an object, the first pair in list
/// order supplies that object's new row. `strategy` must not be Hybrid.
SwapPlan plan_swap(std::size_t n, std::size_t m, std::span<const AlignmentPair> pairs,
                   SwapStrategy strategy);

struct SwappedPair {
  Tensor h_w;
  Tensor h_v;
};

/// Hybrid draws a concrete strategy from `rng`.
SwappedPair swap_features(const Tensor& words, const Tensor& objects,
                          std::span<const AlignmentPair> pairs, SwapStrategy strategy, Rng& rng);

struct SwappedVars {
  Var h_w;
  Var h_v;
};

/// Differentiable form; `strategy` must already be concrete. Untouched
/// sides are returned as the input variables themselves.
SwappedVars swap_features(Var words, Var objects, std::span<const AlignmentPair> pairs,
                          SwapStrategy strategy);

/// A = tanh([h_cls, h_img] . W + b) with W of shape 2d x d.
Var align(Var h_cls, Var h_img, Var w, Var b);

}  // namespace fsmr
