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

#include "fsmr/encoder.hpp"

#include "fsmr/errors.hpp"
#include "fsmr/layers.hpp"
#include "fsmr/ops.hpp"
#include "fsmr/rng.hpp"

namespace fsmr {

void add_encoder_params(ParamStore& params, const EncoderDims& dims, Rng& rng) {
  const std::size_t d = dims.d;
  params.add_uniform("enc.tok", {dims.vocab, d}, d, rng);
  params.add_uniform("enc.pos", {dims.max_positions, d}, d, rng);
  params.add_uniform("enc.ent", {dims.entity_types, d}, d, rng);
  layers::add_linear(params, "enc.obj", dims.d_visual, d, rng);
  layers::add_attention(params, "enc.word_attn", d, rng);
  layers::add_attention(params, "enc.obj_attn", d, rng);
  layers::add_linear(params, "enc.cls", d, d, rng);
  layers::add_linear(params, "enc.img", d, d, rng);
}

Var embed_tokens(std::span<const int> tokens, Var token_table, Var position_table) {
  const std::size_t vocab = token_table.rows();
  if (tokens.size() > position_table.rows()) {
    throw CapacityError("token sequence of length " + std::to_string(tokens.size()) +
                        " exceeds " + std::to_string(position_table.rows()) + " positions");
  }
  std::vector<std::size_t> ids;
  ids.reserve(tokens.size());
  for (int t : tokens) {
    if (t < 0 || static_cast<std::size_t>(t) >= vocab) {
      throw DataError("token id " + std::to_string(t) + " outside vocabulary of size " +
                      std::to_string(vocab));
    }
    ids.push_back(static_cast<std::size_t>(t));
  }
  Var rows = ops::gather_rows(token_table, ids);
  return ops::add(rows, ops::slice_rows(position_table, 0, tokens.size()));
}

Var project_objects(std::span<const ObjectRegion> objects, Var w, Var b, Var entity_table) {
  if (objects.empty()) throw DataError("instance has no objects");
  const std::size_t dv = w.rows();
  Tensor features({objects.size(), dv});
  std::vector<std::size_t> entities;
  entities.reserve(objects.size());
  for (std::size_t j = 0; j < objects.size(); ++j) {
    const auto& o = objects[j];
    if (o.feature.size() != dv) {
      throw DataError("object feature has " + std::to_string(o.feature.size()) +
                      " dimensions, model expects " + std::to_string(dv));
    }
    if (o.entity_id < 0 || static_cast<std::size_t>(o.entity_id) >= entity_table.rows()) {
      throw DataError("entity id " + std::to_string(o.entity_id) + " outside entity table of size " +
                      std::to_string(entity_table.rows()));
    }
    std::copy(o.feature.begin(), o.feature.end(), features.row_span(j).begin());
    entities.push_back(static_cast<std::size_t>(o.entity_id));
  }
  Var x = w.tape->constant(std::move(features));
  return ops::add(ops::tanh(ops::linear(x, w, b)), ops::gather_rows(entity_table, entities));
}

ModalEmbeddings encode(ParamBinder& bind, const Instance& inst, std::size_t candidate,
                       const EncoderDims& dims) {
  if (candidate >= kNumCandidates) {
    throw DataError("candidate index " + std::to_string(candidate) + " out of range");
  }
  std::vector<int> tokens = inst.premise;
  tokens.insert(tokens.end(), inst.candidates[candidate].begin(), inst.candidates[candidate].end());
  if (tokens.empty()) throw DataError("instance '" + inst.id + "' has no words");

  const layers::AttentionOptions self_attn{.heads = dims.heads};
  Var words = embed_tokens(tokens, bind("enc.tok"), bind("enc.pos"));
  words = ops::add(words, layers::attention(bind, "enc.word_attn", words, words, self_attn));

  Var objects = project_objects(inst.objects, bind("enc.obj.W"), bind("enc.obj.b"), bind("enc.ent"));
  objects = ops::add(objects, layers::attention(bind, "enc.obj_attn", objects, objects, self_attn));

  ModalEmbeddings out;
  out.words = words;
  out.objects = objects;
  out.h_cls = layers::linear(bind, "enc.cls", ops::mean_rows(words));
  out.h_img = layers::linear(bind, "enc.img", ops::mean_rows(objects));
  return out;
}

}  // namespace fsmr
