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

#include "fsmr/xattn.hpp"

#include "fsmr/errors.hpp"
#include "fsmr/ops.hpp"

namespace fsmr {

std::string_view to_string(Pooling p) { return p == Pooling::kMean ? "mean" : "max"; }

std::string_view to_string(AttnStrategy s) {
  switch (s) {
    case AttnStrategy::kVisualOnly: return "visual_only";
    case AttnStrategy::kLanguageOnly: return "language_only";
    case AttnStrategy::kMixed: return "mixed";
  }
  return "?";
}

Pooling parse_pooling(std::string_view s) {
  if (s == "mean") return Pooling::kMean;
  if (s == "max") return Pooling::kMax;
  throw ConfigError("unknown attn_pooling '" + std::string(s) + "'");
}

AttnStrategy parse_attn_strategy(std::string_view s) {
  if (s == "visual_only") return AttnStrategy::kVisualOnly;
  if (s == "language_only") return AttnStrategy::kLanguageOnly;
  if (s == "mixed") return AttnStrategy::kMixed;
  throw ConfigError("unknown attn_strategy '" + std::string(s) + "'");
}

void AttentionConfig::validate(std::size_t d) const {
  if (heads == 0 || d % heads != 0) {
    throw ConfigError("attn_heads (" + std::to_string(heads) + ") must divide d_model (" +
                      std::to_string(d) + ")");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("attn_dropout must lie in [0, 1)");
}

void add_xattn_params(ParamStore& params, std::size_t d, const AttentionConfig& cfg, Rng& rng) {
  if (cfg.language_branch()) layers::add_attention(params, "xattn.lang", d, rng);
  if (cfg.visual_branch()) layers::add_attention(params, "xattn.vis", d, rng);
}

void add_itm_params(ParamStore& params, std::size_t width, Rng& rng) {
  layers::add_linear(params, "itm", width, 1, rng);
}

CrossAttention cross_attention(ParamBinder& bind, Var h_w, Var h_v, const AttentionConfig& cfg,
                               bool training, Rng* rng, bool keep_trace) {
  cfg.validate(h_w.cols());
  CrossAttention out;
  layers::AttentionOptions opt{.heads = cfg.heads,
                               .dropout = training ? cfg.dropout : 0.0,
                               .rng = rng};
  if (cfg.language_branch()) {
    opt.trace = keep_trace ? &out.trace_w : nullptr;
    out.o_w = layers::attention(bind, "xattn.lang", h_w, h_v, opt);
  }
  if (cfg.visual_branch()) {
    opt.trace = keep_trace ? &out.trace_v : nullptr;
    out.o_v = layers::attention(bind, "xattn.vis", h_v, h_w, opt);
  }
  return out;
}

Var pool(Var o, Pooling pooling) {
  return pooling == Pooling::kMean ? ops::mean_rows(o) : ops::max_rows(o);
}

Var fuse(std::optional<Var> p_w, std::optional<Var> p_v, AttnStrategy strategy) {
  const bool need_w = strategy != AttnStrategy::kVisualOnly;
  const bool need_v = strategy != AttnStrategy::kLanguageOnly;
  if ((need_w && !p_w) || (need_v && !p_v)) {
    throw NumericError("fuse: branch required by strategy '" + std::string(to_string(strategy)) +
                       "' is absent");
  }
  if (strategy == AttnStrategy::kMixed) return ops::concat_cols({*p_w, *p_v});
  return need_w ? *p_w : *p_v;
}

Var itm_head(Var s_attn, Var w, Var b) {
  if (w.rows() != s_attn.cols() || w.cols() != 1 || b.value().size() != 1) {
    throw ConfigError("ITM head of shape " + shape_string(w.value().shape()) +
                      " does not fit attention output of width " + std::to_string(s_attn.cols()));
  }
  return ops::sigmoid(ops::linear(s_attn, w, b));
}

}  // namespace fsmr
