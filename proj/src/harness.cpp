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

#include "fsmr/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "fsmr/errors.hpp"
#include "fsmr/losses.hpp"
#include "fsmr/ops.hpp"
#include "fsmr/optim.hpp"
#include "fsmr/rng.hpp"

namespace fsmr {

Metrics metrics_from_selections(const Dataset& data, std::span<const std::size_t> selections) {
  if (data.size() != selections.size()) {
    throw DataError("got " + std::to_string(selections.size()) + " selections for " +
                    std::to_string(data.size()) + " instances");
  }
  Metrics m;
  if (data.empty()) return m;
  std::array<std::size_t, kNumCandidates> counts{};
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (selections[i] >= kNumCandidates) throw DataError("selection index out of range");
    ++counts[static_cast<std::size_t>(data[i].categories[selections[i]])];
  }
  const double n = static_cast<double>(data.size());
  for (std::size_t c = 0; c < kNumCandidates; ++c) m.dist[c] = static_cast<double>(counts[c]) / n;
  m.accuracy = m.dist[static_cast<std::size_t>(Category::kAT)];
  return m;
}

Metrics evaluate_with(const Dataset& data,
                      const std::function<std::size_t(const Instance&)>& select) {
  std::vector<std::size_t> picks;
  picks.reserve(data.size());
  for (const auto& inst : data) picks.push_back(select(inst));
  return metrics_from_selections(data, picks);
}

Metrics evaluate(const FsmrModel& model, const Dataset& data) {
  check_compatible(model.config(), data);
  return evaluate_with(data, [&](const Instance& inst) { return model.select_answer(inst); });
}

std::size_t oracle_select(const Instance& inst, const TokenLayout& layout) {
  for (std::size_t c = 0; c < kNumCandidates; ++c) {
    const Consistency k = candidate_consistency(inst, c, layout);
    if (k.premise && k.image) return c;
  }
  return 0;
}

nlohmann::json metrics_json(const Metrics& m) {
  nlohmann::json j;
  j["accuracy"] = m.accuracy;
  j["dist"] = {{"AT", m.dist[0]}, {"D1", m.dist[1]}, {"AF", m.dist[2]}, {"D2", m.dist[3]}};
  j["loss_curve"] = m.loss_curve;
  if (!m.val_accuracy.empty()) j["val_accuracy"] = m.val_accuracy;
  return j;
}

namespace {

// Shortest decimal text that reads back to the same double.
std::string shortest(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string metrics_csv(const Metrics& m) {
  std::string out = "accuracy,AT,D1,AF,D2\n" + shortest(m.accuracy);
  for (double v : m.dist) out += "," + shortest(v);
  return out + "\n";
}

Splits generate_splits(const RunConfig& cfg) {
  Dataset all = generate(cfg.gen_config(cfg.num_train + cfg.num_val + cfg.num_test));
  Splits s;
  auto take = [&](std::size_t from, std::size_t count) {
    return Dataset(std::make_move_iterator(all.begin() + static_cast<std::ptrdiff_t>(from)),
                   std::make_move_iterator(all.begin() + static_cast<std::ptrdiff_t>(from + count)));
  };
  s.train = take(0, cfg.num_train);
  s.val = take(cfg.num_train, cfg.num_val);
  s.test = take(cfg.num_train + cfg.num_val, cfg.num_test);
  return s;
}

Splits load_splits(const std::filesystem::path& dir) {
  Splits s;
  s.train = read_jsonl(dir / "train.jsonl");
  s.val = read_jsonl(dir / "val.jsonl");
  s.test = read_jsonl(dir / "test.jsonl");
  return s;
}

void write_splits(const Splits& splits, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_jsonl(splits.train, dir / "train.jsonl");
  write_jsonl(splits.val, dir / "val.jsonl");
  write_jsonl(splits.test, dir / "test.jsonl");
}

Splits resolve_splits(const RunConfig& cfg) {
  return cfg.data_dir.empty() ? generate_splits(cfg) : load_splits(cfg.data_dir);
}

void zero_object_features(Dataset& data) {
  for (auto& inst : data)
    for (auto& o : inst.objects) std::fill(o.feature.begin(), o.feature.end(), 0.0);
}

void check_compatible(const RunConfig& cfg, const Dataset& data) {
  for (const auto& inst : data) {
    validate_instance(inst, cfg.max_sequence_length);
    if (inst.visual_dim() != cfg.d_visual) {
      throw ConfigError("dataset visual dimension " + std::to_string(inst.visual_dim()) +
                        " does not match model d_visual " + std::to_string(cfg.d_visual));
    }
  }
}

namespace {

struct CandidateRef {
  std::uint32_t instance;
  std::uint32_t candidate;
};

}  // namespace

TrainResult train(const RunConfig& cfg, const Splits& input,
                  const std::function<void(const EpochReport&)>& on_epoch) {
  cfg.validate();
  Splits local;
  const Splits* splits = &input;
  if (cfg.image_blind) {
    local = input;
    zero_object_features(local.train);
    zero_object_features(local.val);
    zero_object_features(local.test);
    splits = &local;
  }
  check_compatible(cfg, splits->train);
  check_compatible(cfg, splits->val);
  check_compatible(cfg, splits->test);
  const Dataset& train_set = splits->train;

  FsmrModel model(cfg);
  TrainResult result;
  result.params = model.params();

  const TrainHyper& hyper = cfg.train;
  const LossWeights weights = cfg.effective_loss();
  std::vector<CandidateRef> order;
  for (std::uint32_t i = 0; i < train_set.size(); ++i)
    for (std::uint32_t c = 0; c < kNumCandidates; ++c) order.push_back({i, c});
  const std::size_t steps_per_epoch = (order.size() + hyper.batch_size - 1) / hyper.batch_size;
  const std::uint64_t total_steps = hyper.epochs * steps_per_epoch;

  Rng shuffle_rng(cfg.seed, "shuffle");
  Rng dropout_rng(cfg.seed, "dropout");
  Rng hybrid_rng(cfg.seed, "hybrid");
  RmspropState state = RmspropState::for_params(model.params());
  ParamStore grads = model.params().zeros_like();
  std::vector<SwapStrategy> draws(train_set.size(), cfg.effective_swap());
  bool have_best = false;

  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    if (cfg.effective_swap() == SwapStrategy::kHybrid) {
      for (auto& d : draws) d = sample_hybrid(hybrid_rng);
    }
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const std::size_t end = std::min(order.size(), start + hyper.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      grads.zero();
      for (std::size_t k = start; k < end; ++k) {
        const Instance& inst = train_set[order[k].instance];
        const std::size_t c = order[k].candidate;
        const int label = inst.categories[c] == Category::kAT ? 1 : 0;
        Tape tape;
        ParamBinder bind(tape, model.params());
        ForwardOptions opts;
        opts.mode = Mode::kTrain;
        opts.dropout_rng = &dropout_rng;
        opts.swap = draws[order[k].instance];
        opts.want_logits = weights.alpha > 0.0;
        opts.want_itm = weights.beta > 0.0;
        CandidateOutput out = model.forward_candidate(bind, inst, c, opts);
        Var loss;
        if (out.logits && out.p_itm) {
          loss = total_loss(ce_loss(*out.logits, label), itm_loss(*out.p_itm, label), weights);
        } else if (out.logits) {
          loss = ops::scale(ce_loss(*out.logits, label), weights.alpha);
        } else {
          loss = ops::scale(itm_loss(*out.p_itm, label), weights.beta);
        }
        const double lv = loss.value()[0];
        if (!std::isfinite(lv)) throw NumericError("non-finite training loss");
        loss_sum += lv;
        tape.backward(loss);
        bind.accumulate_grads(grads, inv_batch);
      }
      rmsprop_step(model.params(), grads, state, hyper, total_steps);
    }
    const double mean_loss = loss_sum / static_cast<double>(order.size());
    const double val_acc = evaluate(model, splits->val).accuracy;
    result.history.loss_curve.push_back(mean_loss);
    result.history.val_accuracy.push_back(val_acc);
    if (!have_best || val_acc > result.best_val_accuracy) {
      have_best = true;
      result.best_val_accuracy = val_acc;
      result.best_epoch = epoch;
      result.params = model.params();
    }
    if (on_epoch) on_epoch({epoch, mean_loss, val_acc});
  }

  FsmrModel best(cfg, result.params);
  if (!have_best) result.best_val_accuracy = evaluate(best, splits->val).accuracy;
  result.test = evaluate(best, splits->test);
  result.test.loss_curve = result.history.loss_curve;
  result.test.val_accuracy = result.history.val_accuracy;
  return result;
}

std::vector<std::pair<std::string, RunConfig>> ablation_arms(const RunConfig& base) {
  std::vector<std::pair<std::string, RunConfig>> arms;
  arms.emplace_back("full", base);
  RunConfig c = base;
  c.disable_swap = true;
  arms.emplace_back("-Feature Swapping", c);
  c = base;
  c.disable_prompt_template = true;
  arms.emplace_back("-Prompt Template", c);
  c = base;
  c.disable_xattn = true;
  arms.emplace_back("-Multi-head Attention", c);
  c = base;
  c.disable_itm = true;
  arms.emplace_back("-ITM loss", c);
  c = base;
  c.disable_ce = true;
  arms.emplace_back("-CE loss", c);
  return arms;
}

std::vector<std::pair<std::string, RunConfig>> swap_sweep_arms(const RunConfig& base) {
  std::vector<std::pair<std::string, RunConfig>> arms;
  for (SwapStrategy s : {SwapStrategy::kImageToText, SwapStrategy::kTextToImage,
                         SwapStrategy::kBidirectional, SwapStrategy::kHybrid}) {
    RunConfig c = base;
    c.disable_swap = false;
    c.swap_strategy = s;
    arms.emplace_back(std::string(to_string(s)), c);
  }
  return arms;
}

std::vector<std::pair<std::string, RunConfig>> attn_sweep_arms(const RunConfig& base) {
  std::vector<std::pair<std::string, RunConfig>> arms;
  for (AttnStrategy s :
       {AttnStrategy::kVisualOnly, AttnStrategy::kLanguageOnly, AttnStrategy::kMixed}) {
    RunConfig c = base;
    c.disable_xattn = false;
    c.attn.strategy = s;
    arms.emplace_back(std::string(to_string(s)), c);
  }
  return arms;
}

ResultTable run_arms(const std::vector<std::pair<std::string, RunConfig>>& arms,
                     const Splits& splits, std::span<const std::uint64_t> seeds,
                     const std::function<void(const std::string&, const EpochReport&)>& on_epoch) {
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  ResultTable table;
  for (const auto& [label, base] : arms) {
    ResultRow mean{label, "mean"};
    for (std::uint64_t seed : seeds) {
      RunConfig cfg = base;
      cfg.seed = seed;
      std::function<void(const EpochReport&)> hook;
      if (on_epoch) hook = [&, label = label](const EpochReport& r) { on_epoch(label, r); };
      const TrainResult r = train(cfg, splits, hook);
      ResultRow row{label, std::to_string(seed), r.best_val_accuracy, r.test.accuracy, r.test.dist};
      mean.val_accuracy += row.val_accuracy;
      mean.test_accuracy += row.test_accuracy;
      for (std::size_t c = 0; c < kNumCandidates; ++c) mean.test_dist[c] += row.test_dist[c];
      table.push_back(std::move(row));
    }
    if (seeds.size() > 1) {
      const double n = static_cast<double>(seeds.size());
      mean.val_accuracy /= n;
      mean.test_accuracy /= n;
      for (double& v : mean.test_dist) v /= n;
      table.push_back(std::move(mean));
    }
  }
  return table;
}

ResultTable ablate(const RunConfig& cfg, const Splits& splits, std::span<const std::uint64_t> seeds) {
  return run_arms(ablation_arms(cfg), splits, seeds);
}

ResultTable sweep_swap(const RunConfig& cfg, const Splits& splits,
                       std::span<const std::uint64_t> seeds) {
  return run_arms(swap_sweep_arms(cfg), splits, seeds);
}

ResultTable sweep_attn(const RunConfig& cfg, const Splits& splits,
                       std::span<const std::uint64_t> seeds) {
  return run_arms(attn_sweep_arms(cfg), splits, seeds);
}

std::string table_csv(const ResultTable& table, const std::string& label_header) {
  std::string out = label_header + ",seed,val_accuracy,test_accuracy,AT,D1,AF,D2\n";
  for (const auto& row : table) {
    out += '"' + row.label + "\"," + row.seed + "," + shortest(row.val_accuracy) + "," +
           shortest(row.test_accuracy);
    for (double v : row.test_dist) out += "," + shortest(v);
    out += "\n";
  }
  return out;
}

}  // namespace fsmr
