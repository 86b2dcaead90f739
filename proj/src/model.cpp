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

#include "fsmr/model.hpp"

#include <cmath>

#include "fsmr/errors.hpp"
#include "fsmr/layers.hpp"
#include "fsmr/ops.hpp"
#include "fsmr/prompt_lm.hpp"
#include "fsmr/rng.hpp"
#include "fsmr/xattn.hpp"

namespace fsmr {

ParamStore FsmrModel::init_params(const RunConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed, "init");
  ParamStore params;
  add_encoder_params(params, cfg.encoder_dims(), rng);
  layers::add_linear(params, "align", 2 * cfg.d_model, cfg.d_model, rng);
  add_lm_params(params, cfg.lm_dims(), rng);
  if (!cfg.disable_xattn) add_xattn_params(params, cfg.d_model, cfg.attn, rng);
  add_itm_params(params, cfg.itm_width(), rng);
  return params;
}

FsmrModel::FsmrModel(RunConfig cfg) : cfg_(std::move(cfg)), params_(init_params(cfg_)) {}

FsmrModel::FsmrModel(RunConfig cfg, ParamStore params)
    : cfg_(std::move(cfg)), params_(std::move(params)) {
  const ParamStore expected = init_params(cfg_);
  for (const auto& e : expected.entries()) {
    if (!params_.contains(e.name)) {
      throw CorruptionError("checkpoint lacks parameter '" + e.name + "'");
    }
    if (params_.at(e.name).shape() != e.value.shape()) {
      throw CorruptionError("parameter '" + e.name + "' has shape " +
                            shape_string(params_.at(e.name).shape()) + ", expected " +
                            shape_string(e.value.shape()));
    }
  }
  if (params_.size() != expected.size()) {
    throw CorruptionError("checkpoint holds " + std::to_string(params_.size()) +
                          " parameters, expected " + std::to_string(expected.size()));
  }
  // Keep the canonical order so optimizer state and saved files line up.
  ParamStore ordered;
  for (const auto& e : expected.entries()) ordered.add(e.name, params_.at(e.name));
  params_ = std::move(ordered);
}

CandidateOutput FsmrModel::forward_candidate(ParamBinder& bind, const Instance& inst,
                                             std::size_t candidate,
                                             const ForwardOptions& opts) const {
  const bool training = opts.mode == Mode::kTrain;
  CandidateOutput out;
  out.encoded = encode(bind, inst, candidate, cfg_.encoder_dims());

  SwapStrategy strategy = opts.swap.value_or(cfg_.effective_swap());
  if (cfg_.disable_swap) strategy = SwapStrategy::kNone;
  if (strategy == SwapStrategy::kHybrid) {
    if (training) throw ConfigError("hybrid swap needs a per-instance draw during training");
    strategy = SwapStrategy::kBidirectional;
  }
  out.swap_used = strategy;
  out.swapped = swap_features(out.encoded.words, out.encoded.objects, inst.alignments[candidate],
                              strategy);
  const Var h_w = out.swapped.h_w;
  const Var h_v = out.swapped.h_v;

  if (opts.want_logits) {
    const LmDims lm = cfg_.lm_dims();
    Var a = align(out.encoded.h_cls, out.encoded.h_img, bind("align.W"), bind("align.b"));
    PromptSequence seq =
        assemble_prompt(bind, out.encoded.h_img, a, h_v, h_w, cfg_.effective_prompt_mode(), lm);
    Var s_cls = lm_forward(bind, seq, lm);
    out.logits = classify(s_cls, bind("lm.head.W"), bind("lm.head.b"));
  }

  if (opts.want_itm) {
    Var s_attn;
    if (cfg_.disable_xattn) {
      s_attn = ops::concat_cols({ops::mean_rows(h_w), ops::mean_rows(h_v)});
    } else {
      if (training && cfg_.attn.dropout > 0.0 && opts.dropout_rng == nullptr) {
        throw ConfigError("training with attention dropout needs a random stream");
      }
      CrossAttention x = cross_attention(bind, h_w, h_v, cfg_.attn, training, opts.dropout_rng);
      std::optional<Var> p_w, p_v;
      if (x.o_w) p_w = pool(*x.o_w, cfg_.attn.pooling);
      if (x.o_v) p_v = pool(*x.o_v, cfg_.attn.pooling);
      s_attn = fuse(p_w, p_v, cfg_.attn.strategy);
    }
    out.p_itm = itm_head(s_attn, bind("itm.W"), bind("itm.b"));
  }
  return out;
}

std::array<double, kNumCandidates> FsmrModel::candidate_scores(const Instance& inst) const {
  const bool use_ce = cfg_.effective_loss().alpha > 0.0;
  ForwardOptions opts;
  opts.mode = Mode::kEval;
  opts.want_logits = use_ce;
  opts.want_itm = !use_ce;
  std::array<double, kNumCandidates> scores{};
  for (std::size_t c = 0; c < kNumCandidates; ++c) {
    Tape tape(false);
    ParamBinder bind(tape, params_);
    CandidateOutput o = forward_candidate(bind, inst, c, opts);
    if (use_ce) {
      const Tensor& l = o.logits->value();
      // Softmax entailment probability, 1 / (1 + exp(l0 - l1)).
      scores[c] = 1.0 / (1.0 + std::exp(l[0] - l[1]));
    } else {
      scores[c] = o.p_itm->value()[0];
    }
  }
  return scores;
}

std::size_t FsmrModel::select_answer(const Instance& inst) const {
  const auto scores = candidate_scores(inst);
  return argmax_lowest(scores);
}

std::size_t argmax_lowest(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

}  // namespace fsmr
