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

#include "fsmr/losses.hpp"

#include <algorithm>
#include <cmath>

#include "fsmr/errors.hpp"
#include "fsmr/ops.hpp"

namespace fsmr {

namespace {

void check_label(int y) {
  if (y != 0 && y != 1) throw NumericError("label must be 0 or 1, got " + std::to_string(y));
}

void check_probability(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw NumericError("ITM probability " + std::to_string(p) + " outside (0, 1)");
  }
}

}  // namespace

void LossWeights::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw ConfigError("loss weights must be non-negative");
  if (!(alpha + beta > 0.0)) throw ConfigError("loss_alpha + loss_beta must be positive");
}

double itm_loss(double p, int y) {
  check_label(y);
  check_probability(p);
  return -(y * std::log(p) + (1 - y) * std::log(1.0 - p));
}

double ce_loss(std::span<const double> logits, int y) {
  if (y < 0 || static_cast<std::size_t>(y) >= logits.size()) {
    throw NumericError("class index " + std::to_string(y) + " outside logits");
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (double v : logits) s += std::exp(v - m);
  return m + std::log(s) - logits[static_cast<std::size_t>(y)];
}

double total_loss(double ce, double itm, const LossWeights& w) { return w.alpha * ce + w.beta * itm; }

double batch_total_loss(std::span<const double> ce, std::span<const double> itm,
                        const LossWeights& w) {
  if (ce.size() != itm.size() || ce.empty()) {
    throw NumericError("batch loss needs matching, non-empty ce and itm lists");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < ce.size(); ++k) s += total_loss(ce[k], itm[k], w);
  return s / static_cast<double>(ce.size());
}

Var itm_loss(Var p, int y) {
  const double pv = p.value().item();
  const double loss = itm_loss(pv, y);
  return p.tape->record(Tensor::scalar(loss), {p}, [p, y](Tape& t, std::uint32_t self) {
    const double g = t.grad(self)[0];
    const double pv = t.value(p.id)[0];
    t.grad(p.id)[0] += g * (y ? -1.0 / pv : 1.0 / (1.0 - pv));
  });
}

Var ce_loss(Var logits, int y) {
  const Tensor& lv = logits.value();
  const double loss = ce_loss(lv.data(), y);
  return logits.tape->record(Tensor::scalar(loss), {logits}, [logits, y](Tape& t, std::uint32_t self) {
    const double g = t.grad(self)[0];
    const Tensor& lv = t.value(logits.id);
    const double m = *std::max_element(lv.data().begin(), lv.data().end());
    double s = 0.0;
    for (double v : lv.data()) s += std::exp(v - m);
    Tensor& gl = t.grad(logits.id);
    for (std::size_t i = 0; i < lv.size(); ++i) {
      const double prob = std::exp(lv[i] - m) / s;
      gl[i] += g * (prob - (static_cast<int>(i) == y ? 1.0 : 0.0));
    }
  });
}

Var total_loss(Var ce, Var itm, const LossWeights& w) {
  return ops::add(ops::scale(ce, w.alpha), ops::scale(itm, w.beta));
}

}  // namespace fsmr
