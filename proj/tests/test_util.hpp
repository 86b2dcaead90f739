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

#include <cstddef>

#include "fsmr/config.hpp"
#include "fsmr/instance.hpp"
#include "fsmr/rng.hpp"
#include "fsmr/synth_data.hpp"
#include "fsmr/tensor.hpp"

namespace fsmr::testing {

inline Tensor random_tensor(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0,
                            double hi = 1.0) {
  Tensor t({r, c});
  for (auto& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

// A small configuration that keeps full-pipeline gradient checks cheap.
inline RunConfig tiny_config(std::uint64_t seed = 0) {
  RunConfig cfg;
  cfg.seed = seed;
  cfg.d_model = 8;
  cfg.lm_heads = 2;
  cfg.attn.heads = 2;
  cfg.attn.dropout = 0.0;
  cfg.max_sequence_length = 40;
  cfg.num_train = 40;
  cfg.num_val = 20;
  cfg.num_test = 20;
  cfg.train.epochs = 2;
  return cfg;
}

inline Instance first_instance(const RunConfig& cfg, std::size_t max_objects = 3) {
  GenConfig g = cfg.gen_config(1);
  g.max_entities = max_objects;
  g.min_entities = max_objects < g.min_entities ? max_objects : g.min_entities;
  return generate(g).front();
}

}  // namespace fsmr::testing
