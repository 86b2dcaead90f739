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

#include "fsmr/instance.hpp"
#include "fsmr/params.hpp"

namespace fsmr {

class Rng;

/// Sizes of the toy bimodal encoder.
struct EncoderDims {
  std::size_t d = 32;              // hidden width
  std::size_t d_visual = 16;       // object feature width
  std::size_t vocab = 64;
  std::size_t entity_types = 8;
  std::size_t max_positions = 150;
  std::size_t heads = 4;
};

/// Encoder output bundle: overall text vector, per-word rows, per-object
/// rows and overall image vector.
struct ModalEmbeddings {
  Var h_cls;    // 1 x d
  Var words;    // n x d
  Var objects;  // m x d
  Var h_img;    // 1 x d
};

void add_encoder_params(ParamStore& params, const EncoderDims& dims, Rng& rng);

/// Row t = token_table[tokens[t]] + position_table[t].
Var embed_tokens(std::span<const int> tokens, Var token_table, Var position_table);

/// Row j = tanh(feature_j . W + b) + entity_table[entity_j].
Var project_objects(std::span<const ObjectRegion> objects, Var w, Var b, Var entity_table);

/// Encodes the premise followed by one candidate, and the object set. Each
/// modality is mixed by its own residual self-attention layer; h_cls and
/// h_img are linear maps of the modality's mean row.
ModalEmbeddings encode(ParamBinder& bind, const Instance& inst, std::size_t candidate,
                       const EncoderDims& dims);

}  // namespace fsmr
