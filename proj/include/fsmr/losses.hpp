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

#include "fsmr/tape.hpp"

namespace fsmr {

struct LossWeights {
  double alpha = 1.0;  // cross-entropy
  double beta = 1.0;   // image-text matching

  void validate() const;
};

/// -(y log p + (1 - y) log(1 - p)). Throws NumericError unless 0 < p < 1.
double itm_loss(double p, int y);
/// -log softmax(logits)[y] via log-sum-exp.
double ce_loss(std::span<const double> logits, int y);
double total_loss(double ce, double itm, const LossWeights& w);
/// Mean of alpha ce_k + beta itm_k over a batch.
double batch_total_loss(std::span<const double> ce, std::span<const double> itm,
                        const LossWeights& w);

Var itm_loss(Var p, int y);
Var ce_loss(Var logits, int y);
Var total_loss(Var ce, Var itm, const LossWeights& w);

}  // namespace fsmr
