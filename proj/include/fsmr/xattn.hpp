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

#include <optional>
#include <string_view>

#include "fsmr/layers.hpp"
#include "fsmr/params.hpp"

namespace fsmr {

class Rng;

enum class Pooling { kMean, kMax };
enum class AttnStrategy { kVisualOnly, kLanguageOnly, kMixed };

std::string_view to_string(Pooling p);
std::string_view to_string(AttnStrategy s);
Pooling parse_pooling(std::string_view s);
AttnStrategy parse_attn_strategy(std::string_view s);

struct AttentionConfig {
  std::size_t heads = 4;
  double dropout = 0.2;
  Pooling pooling = Pooling::kMean;
  AttnStrategy strategy = AttnStrategy::kMixed;

  void validate(std::size_t d) const;
  bool language_branch() const { return strategy != AttnStrategy::kVisualOnly; }
  bool visual_branch() const { return strategy != AttnStrategy::kLanguageOnly; }
};

/// Registers xattn.lang (word queries over objects) and/or xattn.vis
/// (object queries over words) per the strategy.
void add_xattn_params(ParamStore& params, std::size_t d, const AttentionConfig& cfg, Rng& rng);

/// Registers itm.W (width x 1) and itm.b.
void add_itm_params(ParamStore& params, std::size_t width, Rng& rng);

struct CrossAttention {
  std::optional<Var> o_w;  // n x d, queries from words
  std::optional<Var> o_v;  // m x d, queries from objects
  layers::AttentionTrace trace_w;
  layers::AttentionTrace trace_v;
};

/// O_w = MultiHead(Q from h_w, K/V from h_v); O_v = MultiHead(Q from h_v,
/// K/V from h_w). Dropout on attention weights only when `training`.
CrossAttention cross_attention(ParamBinder& bind, Var h_w, Var h_v, const AttentionConfig& cfg,
                               bool training, Rng* rng, bool keep_trace = false);

/// Column-wise mean or max; throws NumericError on zero rows.
Var pool(Var o, Pooling pooling);

/// Mixed: [P_w, P_v]; single-branch strategies pass their branch through.
Var fuse(std::optional<Var> p_w, std::optional<Var> p_v, AttnStrategy strategy);

/// p_ITM = sigmoid(S_attn . W + b), 1 x 1.
Var itm_head(Var s_attn, Var w, Var b);

}  // namespace fsmr
