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

#include "fsmr/prompt_lm.hpp"

#include "fsmr/errors.hpp"
#include "fsmr/layers.hpp"
#include "fsmr/ops.hpp"
#include "fsmr/rng.hpp"

namespace fsmr {

std::string_view to_string(PromptMode m) {
  return m == PromptMode::kFull ? "full" : "no_template";
}

PromptMode parse_prompt_mode(std::string_view s) {
  if (s == "full") return PromptMode::kFull;
  if (s == "no_template") return PromptMode::kNoTemplate;
  throw ConfigError("unknown prompt_mode '" + std::string(s) + "'");
}

std::size_t prompt_length(std::size_t m, std::size_t n, PromptMode mode, const LmDims& dims) {
  const std::size_t phrases = mode == PromptMode::kFull ? dims.template_rows() : 0;
  return 4 + phrases + m + n;  // CLS, h_img, A, SEP
}

void add_lm_params(ParamStore& params, const LmDims& dims, Rng& rng) {
  const std::size_t d = dims.d;
  params.add_uniform("lm.cls", {1, d}, d, rng);
  params.add_uniform("lm.sep", {1, d}, d, rng);
  params.add_uniform("lm.template", {dims.template_rows(), d}, d, rng);
  params.add_uniform("lm.pos", {dims.max_sequence_length, d}, d, rng);
  for (std::size_t l = 0; l < dims.layers; ++l) {
    const std::string p = "lm.layer" + std::to_string(l);
    layers::add_layer_norm(params, p + ".ln1", d);
    layers::add_attention(params, p + ".attn", d, rng);
    layers::add_layer_norm(params, p + ".ln2", d);
    layers::add_linear(params, p + ".ff1", d, dims.ff_mult * d, rng);
    layers::add_linear(params, p + ".ff2", dims.ff_mult * d, d, rng);
  }
  layers::add_layer_norm(params, "lm.ln_f", d);
  layers::add_linear(params, "lm.head", d, 2, rng);
}

PromptSequence assemble_prompt(ParamBinder& bind, Var h_img, Var align, Var h_v, Var h_w,
                               PromptMode mode, const LmDims& dims) {
  const std::size_t d = dims.d;
  for (Var v : {h_img, align, h_v, h_w}) {
    if (v.cols() != d) {
      throw ShapeError("prompt slot width " + std::to_string(v.cols()) + " differs from model width " +
                       std::to_string(d));
    }
  }
  const std::size_t m = h_v.rows(), n = h_w.rows();
  const std::size_t length = prompt_length(m, n, mode, dims);
  if (length > dims.max_sequence_length) {
    throw CapacityError("prompt length " + std::to_string(length) +
                        " exceeds the maximum sequence length " +
                        std::to_string(dims.max_sequence_length));
  }
  PromptSequence seq;
  seq.slot_map.reserve(length);
  std::vector<Var> parts;
  auto push = [&](Var v, Slot slot) {
    parts.push_back(v);
    seq.slot_map.insert(seq.slot_map.end(), v.rows(), slot);
  };
  const bool full = mode == PromptMode::kFull;
  Var phrases = bind("lm.template");
  std::size_t at = 0;
  auto phrase = [&](std::size_t k) {
    const std::size_t len = dims.template_lengths[k];
    if (full && len) push(ops::slice_rows(phrases, at, at + len), Slot::kTemplate);
    at += len;
  };
  push(bind("lm.cls"), Slot::kCls);
  phrase(0);
  push(h_img, Slot::kImgSlot);
  phrase(1);
  push(align, Slot::kAlignSlot);
  phrase(2);
  if (m) push(h_v, Slot::kObj);
  push(bind("lm.sep"), Slot::kSep);
  if (n) push(h_w, Slot::kWord);
  seq.rows = ops::concat_rows(parts);
  return seq;
}

Var lm_forward(ParamBinder& bind, const PromptSequence& seq, const LmDims& dims) {
  const std::size_t length = seq.rows.rows();
  Var x = ops::add(seq.rows, ops::slice_rows(bind("lm.pos"), 0, length));
  const layers::AttentionOptions attn{.heads = dims.heads};
  for (std::size_t l = 0; l < dims.layers; ++l) {
    const std::string p = "lm.layer" + std::to_string(l);
    // Only the CLS row is read out, so the last layer computes that row alone.
    const bool last = l + 1 == dims.layers;
    Var h = layers::layer_norm(bind, p + ".ln1", x);
    Var query = last ? ops::slice_rows(h, 0, 1) : h;
    Var residual = last ? ops::slice_rows(x, 0, 1) : x;
    x = ops::add(residual, layers::attention(bind, p + ".attn", query, h, attn));
    h = layers::layer_norm(bind, p + ".ln2", x);
    h = layers::linear(bind, p + ".ff2", ops::gelu(layers::linear(bind, p + ".ff1", h)));
    x = ops::add(x, h);
  }
  if (dims.layers == 0) x = ops::slice_rows(x, 0, 1);
  return layers::layer_norm(bind, "lm.ln_f", x);
}

Var classify(Var s_cls, Var w, Var b) { return ops::linear(s_cls, w, b); }

}  // namespace fsmr
