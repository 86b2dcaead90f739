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

#include "fsmr/params.hpp"

namespace fsmr {

/// Optimizer and schedule settings. The defaults are sized for the toy
/// model; the published regimen (lr 4e-6) is selectable.
struct TrainHyper {
  double learning_rate = 1e-3;
  double weight_decay = 8e-5;
  double epsilon = 5e-5;
  double rms_decay = 0.99;
  std::size_t epochs = 30;
  std::size_t batch_size = 8;

  void validate() const;
};

struct RmspropState {
  ParamStore mean_square;  // running average of squared gradients
  std::uint64_t step = 0;

  static RmspropState for_params(const ParamStore& params);
};

/// Learning rate at `step` under linear decay to zero at `total_steps`.
/// A zero total disables the schedule.
double scheduled_learning_rate(const TrainHyper& hyper, std::uint64_t step,
                               std::uint64_t total_steps);

/// One RMSprop update with decoupled weight decay:
///   v <- rho v + (1 - rho) g^2
///   p <- p - lr_t g / (sqrt(v) + eps) - lr_t wd p
void rmsprop_step(ParamStore& params, const ParamStore& grads, RmspropState& state,
                  const TrainHyper& hyper, std::uint64_t total_steps);

}  // namespace fsmr
