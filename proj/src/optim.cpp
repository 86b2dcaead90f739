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

#include "fsmr/optim.hpp"

#include <algorithm>
#include <cmath>

#include "fsmr/errors.hpp"

namespace fsmr {

void TrainHyper::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(rms_decay > 0.0 && rms_decay < 1.0)) throw ConfigError("rms_decay must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
}

RmspropState RmspropState::for_params(const ParamStore& params) {
  return RmspropState{params.zeros_like(), 0};
}

double scheduled_learning_rate(const TrainHyper& hyper, std::uint64_t step,
                               std::uint64_t total_steps) {
  if (total_steps == 0) return hyper.learning_rate;
  const double remaining =
      1.0 - static_cast<double>(step) / static_cast<double>(total_steps);
  return hyper.learning_rate * std::max(0.0, remaining);
}

void rmsprop_step(ParamStore& params, const ParamStore& grads, RmspropState& state,
                  const TrainHyper& hyper, std::uint64_t total_steps) {
  if (state.mean_square.size() == 0) state.mean_square = params.zeros_like();
  auto& pe = params.entries();
  const auto& ge = grads.entries();
  auto& ve = state.mean_square.entries();
  if (ge.size() != pe.size() || ve.size() != pe.size()) {
    throw ShapeError("optimizer received " + std::to_string(ge.size()) + " gradients for " +
                     std::to_string(pe.size()) + " parameters");
  }
  const double lr = scheduled_learning_rate(hyper, state.step, total_steps);
  const double rho = hyper.rms_decay;
  for (std::size_t i = 0; i < pe.size(); ++i) {
    Tensor& p = pe[i].value;
    const Tensor& g = ge[i].value;
    Tensor& v = ve[i].value;
    if (ge[i].name != pe[i].name || g.shape() != p.shape() || v.shape() != p.shape()) {
      throw ShapeError("gradient for parameter '" + pe[i].name + "' has shape " +
                       shape_string(g.shape()) + ", expected " + shape_string(p.shape()));
    }
    for (std::size_t j = 0; j < p.size(); ++j) {
      v[j] = rho * v[j] + (1.0 - rho) * g[j] * g[j];
      p[j] -= lr * (g[j] / (std::sqrt(v[j]) + hyper.epsilon)) + lr * hyper.weight_decay * p[j];
    }
  }
  ++state.step;
}

}  // namespace fsmr
