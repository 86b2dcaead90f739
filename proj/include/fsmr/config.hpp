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

#include <json.hpp>

#include "fsmr/encoder.hpp"
#include "fsmr/fusion.hpp"
#include "fsmr/losses.hpp"
#include "fsmr/optim.hpp"
#include "fsmr/prompt_lm.hpp"
#include "fsmr/synth_data.hpp"
#include "fsmr/xattn.hpp"

namespace fsmr {

/// Every tunable of a run. JSON keys match the field names; unknown keys
/// are rejected.
struct RunConfig {
  std::uint64_t seed = 0;

  // Model.
  std::size_t d_model = 32;
  std::size_t d_visual = 16;
  std::size_t vocab_size = 64;
  std::size_t num_entity_types = 8;
  std::size_t lm_heads = 4;
  std::size_t lm_layers = 2;
  std::size_t max_sequence_length = 150;

  SwapStrategy swap_strategy = SwapStrategy::kBidirectional;
  PromptMode prompt_mode = PromptMode::kFull;
  AttentionConfig attn;
  LossWeights loss;
  TrainHyper train;

  // Ablation switches.
  bool disable_swap = false;
  bool disable_prompt_template = false;
  bool disable_xattn = false;
  bool disable_itm = false;
  bool disable_ce = false;
  /// Replace every object feature with zeros (text-only control).
  bool image_blind = false;

  // Data: either a directory with train/val/test.jsonl or generation
  // settings for an in-memory dataset.
  std::string data_dir;
  std::size_t num_train = 2000;
  std::size_t num_val = 500;
  std::size_t num_test = 500;
  std::uint64_t data_seed = 0;
  std::size_t min_entities = 2;
  std::size_t max_entities = 4;
  std::size_t num_relations = 4;
  std::size_t num_attributes = 4;
  double noise_sigma = 0.05;
  double feature_scale = 1.0;

  void validate() const;

  // Values after applying the ablation switches.
  SwapStrategy effective_swap() const {
    return disable_swap ? SwapStrategy::kNone : swap_strategy;
  }
  PromptMode effective_prompt_mode() const {
    return disable_prompt_template ? PromptMode::kNoTemplate : prompt_mode;
  }
  LossWeights effective_loss() const {
    return {disable_ce ? 0.0 : loss.alpha, disable_itm ? 0.0 : loss.beta};
  }
  /// Width of the ITM head input.
  std::size_t itm_width() const;

  EncoderDims encoder_dims() const;
  LmDims lm_dims() const;
  GenConfig gen_config(std::size_t num_instances) const;
  TokenLayout token_layout() const { return gen_config(0).layout(); }

  nlohmann::json to_json() const;
  /// Throws ConfigError naming the first unknown or mistyped key.
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);
};

}  // namespace fsmr
