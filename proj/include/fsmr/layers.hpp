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

#include <string>
#include <vector>

#include "fsmr/ops.hpp"
#include "fsmr/params.hpp"

namespace fsmr {

class Rng;

namespace layers {

/// Registers `<name>.W` (in x out) and `<name>.b` (1 x out).
void add_linear(ParamStore& params, const std::string& name, std::size_t in, std::size_t out,
                Rng& rng);
Var linear(ParamBinder& bind, const std::string& name, Var x);

/// Registers `<name>.gain` (ones) and `<name>.bias` (zeros).
void add_layer_norm(ParamStore& params, const std::string& name, std::size_t width);
Var layer_norm(ParamBinder& bind, const std::string& name, Var x);

/// Registers the q, k, v and output projections under `<name>.{q,k,v,o}`.
void add_attention(ParamStore& params, const std::string& name, std::size_t d, Rng& rng);

/// Per-head attention probabilities (before dropout), one matrix per head,
/// rows indexed by query and columns by key.
struct AttentionTrace {
  std::vector<Tensor> weights;
};

struct AttentionOptions {
  std::size_t heads = 1;
  double dropout = 0.0;       // applied to attention probabilities
  Rng* rng = nullptr;         // required when dropout > 0
  AttentionTrace* trace = nullptr;
};

/// Multi-head scaled dot-product attention. Queries come from `query_src`,
/// keys and values from `kv_src`; scores are scaled by 1/sqrt(d / heads),
/// heads are concatenated and passed through the output projection.
Var attention(ParamBinder& bind, const std::string& name, Var query_src, Var kv_src,
              const AttentionOptions& opt);

}  // namespace layers
}  // namespace fsmr
