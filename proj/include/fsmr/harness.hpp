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
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fsmr/config.hpp"
#include "fsmr/model.hpp"

namespace fsmr {

/// Selection accuracy plus the share of selections landing in each
/// category, in AT, D1, AF, D2 order.
struct Metrics {
  double accuracy = 0.0;
  std::array<double, kNumCandidates> dist{};
  std::vector<double> loss_curve;
  std::vector<double> val_accuracy;  // per epoch, training runs only
};

Metrics metrics_from_selections(const Dataset& data, std::span<const std::size_t> selections);
Metrics evaluate_with(const Dataset& data,
                      const std::function<std::size_t(const Instance&)>& select);
/// Eval-mode selection with the model. Throws ConfigError when the data's
/// visual dimension differs from the model's.
Metrics evaluate(const FsmrModel& model, const Dataset& data);

/// Picks the candidate consistent with both premise and image.
std::size_t oracle_select(const Instance& inst, const TokenLayout& layout);

nlohmann::json metrics_json(const Metrics& m);
std::string metrics_csv(const Metrics& m);

struct Splits {
  Dataset train;
  Dataset val;
  Dataset test;
};

Splits generate_splits(const RunConfig& cfg);
/// Reads train.jsonl, val.jsonl and test.jsonl from `dir`.
Splits load_splits(const std::filesystem::path& dir);
void write_splits(const Splits& splits, const std::filesystem::path& dir);
/// Loads from cfg.data_dir when set, otherwise generates.
Splits resolve_splits(const RunConfig& cfg);

void zero_object_features(Dataset& data);
void check_compatible(const RunConfig& cfg, const Dataset& data);

struct EpochReport {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  ParamStore params;  // best validation epoch (initial parameters if no epochs)
  std::size_t best_epoch = 0;
  double best_val_accuracy = 0.0;
  Metrics history;  // loss_curve and val_accuracy
  Metrics test;
};

/// Candidate-level mini-batches of size K, mean of alpha CE + beta ITM per
/// batch, RMSprop with linear decay, validation after every epoch and
/// best-epoch retention (ties keep the earlier epoch).
TrainResult train(const RunConfig& cfg, const Splits& splits,
                  const std::function<void(const EpochReport&)>& on_epoch = {});

struct ResultRow {
  std::string label;
  std::string seed;  // decimal seed, or "mean"
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::array<double, kNumCandidates> test_dist{};
};

using ResultTable = std::vector<ResultRow>;

/// The six ablation arms: full, -Feature Swapping, -Prompt Template,
/// -Multi-head Attention, -ITM loss, -CE loss.
std::vector<std::pair<std::string, RunConfig>> ablation_arms(const RunConfig& base);
std::vector<std::pair<std::string, RunConfig>> swap_sweep_arms(const RunConfig& base);
std::vector<std::pair<std::string, RunConfig>> attn_sweep_arms(const RunConfig& base);

/// Trains each arm for each seed; appends per-arm mean rows when more
/// than one seed is given.
ResultTable run_arms(const std::vector<std::pair<std::string, RunConfig>>& arms,
                     const Splits& splits, std::span<const std::uint64_t> seeds,
                     const std::function<void(const std::string&, const EpochReport&)>& on_epoch = {});

ResultTable ablate(const RunConfig& cfg, const Splits& splits, std::span<const std::uint64_t> seeds);
ResultTable sweep_swap(const RunConfig& cfg, const Splits& splits,
                       std::span<const std::uint64_t> seeds);
ResultTable sweep_attn(const RunConfig& cfg, const Splits& splits,
                       std::span<const std::uint64_t> seeds);

std::string table_csv(const ResultTable& table, const std::string& label_header);

}  // namespace fsmr
