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

#include <array>
#include <optional>
#include <span>

#include "fsmr/config.hpp"
#include "fsmr/encoder.hpp"
#include "fsmr/fusion.hpp"
#include "fsmr/params.hpp"

namespace fsmr {

class Rng;

enum class Mode { kTrain, kEval };

struct ForwardOptions {
  Mode mode = Mode::kEval;
  Rng* dropout_rng = nullptr;
  /// Concrete strategy drawn for this instance when the run uses Hybrid.
  std::optional<SwapStrategy> swap;
  bool want_logits = true;
  bool want_itm = true;
};

struct CandidateOutput {
  std::optional<Var> logits;  // 1 x 2, index 1 = entailment
  std::optional<Var> p_itm;   // 1 x 1
  ModalEmbeddings encoded;
  SwappedVars swapped;
  SwapStrategy swap_used = SwapStrategy::kNone;
};

/// The full pipeline: encoder, feature swap, aligner, prompt LM with
/// classifier, and cross-modal attention with ITM head.
class FsmrModel {
 public:
  /// Fresh parameters drawn from the run seed.
  explicit FsmrModel(RunConfig cfg);
  /// Adopts existing parameters; throws CorruptionError if their names or
  /// shapes differ from what the config implies.
  FsmrModel(RunConfig cfg, ParamStore params);

  static ParamStore init_params(const RunConfig& cfg);

  const RunConfig& config() const noexcept { return cfg_; }
  const ParamStore& params() const noexcept { return params_; }
  ParamStore& params() noexcept { return params_; }

  CandidateOutput forward_candidate(ParamBinder& bind, const Instance& inst,
                                    std::size_t candidate, const ForwardOptions& opts) const;

  /// Eval-mode scores: entailment probability when the CE head is trained,
  /// otherwise p_ITM.
  std::array<double, kNumCandidates> candidate_scores(const Instance& inst) const;
  std::size_t select_answer(const Instance& inst) const;

 private:
  RunConfig cfg_;
  ParamStore params_;
};

/// Index of the maximum; ties go to the lowest index.
std::size_t argmax_lowest(std::span<const double> scores);

}  // namespace fsmr
