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
#include <string_view>
#include <vector>

#include "fsmr/params.hpp"

namespace fsmr {

class Rng;

enum class PromptMode { kFull, kNoTemplate };

std::string_view to_string(PromptMode m);
PromptMode parse_prompt_mode(std::string_view s);

/// Role of each row in an assembled prompt.
enum class Slot { kCls, kTemplate, kImgSlot, kAlignSlot, kObj, kSep, kWord };

/// Sizes of the prompt language model.
struct LmDims {
  std::size_t d = 32;
  std::size_t heads = 4;
  std::size_t layers = 2;
  std::size_t ff_mult = 4;
  std::size_t max_sequence_length = 150;
  // Learned phrase rows preceding the image slot, the alignment slot and
  // the object rows respectively.
  std::array<std::size_t, 3> template_lengths{5, 4, 3};

  std::size_t template_rows() const {
    return template_lengths[0] + template_lengths[1] + template_lengths[2];
  }
};

struct PromptSequence {
  Var rows;  // L x d
  std::vector<Slot> slot_map;
};

/// Sequence length for m objects and n words.
std::size_t prompt_length(std::size_t m, std::size_t n, PromptMode mode, const LmDims& dims);

void add_lm_params(ParamStore& params, const LmDims& dims, Rng& rng);

/// Full layout:
///   [CLS] T1 <h_img> T2 <A> T3 <h_v rows> [SEP] <h_w rows>
/// No-template layout drops the T phrase rows.
/// Throws CapacityError when the length exceeds the maximum.
PromptSequence assemble_prompt(ParamBinder& bind, Var h_img, Var align, Var h_v, Var h_w,
                               PromptMode mode, const LmDims& dims);

/// Pre-norm transformer encoder over the prompt with learned positions;
/// returns the final-normalized row 0 (S_CLS), 1 x d.
Var lm_forward(ParamBinder& bind, const PromptSequence& seq, const LmDims& dims);

/// logits = S_CLS . W + b, W of shape d x 2. Index 1 is entailment.
Var classify(Var s_cls, Var w, Var b);

}  // namespace fsmr
