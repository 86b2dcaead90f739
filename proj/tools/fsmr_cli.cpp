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

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "fsmr/fsmr.h"

namespace {

struct Failure {
  fsmr_status status;
};

void check(fsmr_status s) {
  if (s != FSMR_OK) throw Failure{s};
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};

using ConfigPtr = std::unique_ptr<fsmr_config, Deleter<fsmr_config, fsmr_config_free>>;
using DatasetPtr = std::unique_ptr<fsmr_dataset, Deleter<fsmr_dataset, fsmr_dataset_free>>;
using ModelPtr = std::unique_ptr<fsmr_model, Deleter<fsmr_model, fsmr_model_free>>;
using MetricsPtr = std::unique_ptr<fsmr_metrics, Deleter<fsmr_metrics, fsmr_metrics_free>>;
using TablePtr = std::unique_ptr<fsmr_table, Deleter<fsmr_table, fsmr_table_free>>;

ConfigPtr load_config(const std::string& path) {
  fsmr_config* raw = nullptr;
  if (path.empty()) {
    check(fsmr_config_default(&raw));
  } else {
    check(fsmr_config_load(path.c_str(), &raw));
  }
  return ConfigPtr(raw);
}

void print_epoch(const char* label, size_t epoch, double loss, double val, void* user) {
  if (*static_cast<bool*>(user)) return;
  if (label && *label) {
    std::fprintf(stderr, "[%s] epoch %zu  loss %.6f  val_acc %.4f\n", label, epoch, loss, val);
  } else {
    std::fprintf(stderr, "epoch %zu  loss %.6f  val_acc %.4f\n", epoch, loss, val);
  }
}

std::string sibling(const std::string& path, const std::string& ext) {
  std::filesystem::path p(path);
  p.replace_extension(ext);
  return p.string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FSMR: feature-swapping multimodal reasoning on synthetic premise/image data"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress per-epoch progress");

  std::string config_path, out_path, data_path, ckpt_path, metrics_path;
  std::vector<std::uint64_t> seeds;

  auto* gen = app.add_subcommand("gen-data", "Generate train/val/test JSONL splits");
  gen->add_option("--config", config_path, "Run config JSON")->check(CLI::ExistingFile);
  gen->add_option("--out", out_path, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Train a model and write a checkpoint");
  train->add_option("--config", config_path, "Run config JSON")->check(CLI::ExistingFile);
  train->add_option("--data", data_path, "Directory holding train/val/test.jsonl");
  train->add_option("--out", ckpt_path, "Checkpoint path")->required();
  train->add_option("--metrics", metrics_path, "Metrics JSON path (default <out>.metrics.json)");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a JSONL dataset");
  eval->add_option("--ckpt", ckpt_path, "Checkpoint path")->required();
  eval->add_option("--data", data_path, "Dataset JSONL")->required();
  eval->add_option("--out", out_path, "Metrics JSON path; a CSV is written beside it")->required();

  std::vector<std::pair<CLI::App*, fsmr_experiment>> experiments;
  for (auto [name, kind, help] :
       {std::tuple{"ablate", FSMR_EXPERIMENT_ABLATE, "Run the ablation matrix"},
        std::tuple{"sweep-swap", FSMR_EXPERIMENT_SWEEP_SWAP, "Sweep feature-swapping strategies"},
        std::tuple{"sweep-attn", FSMR_EXPERIMENT_SWEEP_ATTN, "Sweep attention strategies"}}) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Run config JSON")->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "Result CSV path")->required();
    sub->add_option("--seeds", seeds, "Comma-separated seeds; adds mean rows when several")
        ->delimiter(',');
    experiments.emplace_back(sub, kind);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return FSMR_ERR_CONFIG;
  }

  try {
    if (gen->parsed()) {
      ConfigPtr cfg = load_config(config_path);
      check(fsmr_generate_splits(cfg.get(), out_path.c_str()));
      std::printf("wrote splits to %s\n", out_path.c_str());
    } else if (train->parsed()) {
      ConfigPtr cfg = load_config(config_path);
      fsmr_model* model = nullptr;
      fsmr_metrics* metrics = nullptr;
      check(fsmr_train(cfg.get(), data_path.empty() ? nullptr : data_path.c_str(), print_epoch,
                       &quiet, &model, &metrics));
      ModelPtr model_owner(model);
      MetricsPtr metrics_owner(metrics);
      if (metrics_path.empty()) metrics_path = ckpt_path + ".metrics.json";
      check(fsmr_model_save(model, ckpt_path.c_str()));
      check(fsmr_metrics_write_json(metrics, metrics_path.c_str()));
      std::printf("test accuracy %.4f\ncheckpoint %s\nmetrics %s\n", fsmr_metrics_accuracy(metrics),
                  ckpt_path.c_str(), metrics_path.c_str());
    } else if (eval->parsed()) {
      fsmr_model* model = nullptr;
      check(fsmr_model_load(ckpt_path.c_str(), &model));
      ModelPtr model_owner(model);
      fsmr_dataset* data = nullptr;
      check(fsmr_dataset_read(data_path.c_str(), &data));
      DatasetPtr data_owner(data);
      fsmr_metrics* metrics = nullptr;
      check(fsmr_evaluate(model, data, &metrics));
      MetricsPtr metrics_owner(metrics);
      check(fsmr_metrics_write_json(metrics, out_path.c_str()));
      const std::string csv = sibling(out_path, ".csv");
      check(fsmr_metrics_write_csv(metrics, csv.c_str()));
      std::printf("accuracy %.4f  AT %.4f  D1 %.4f  AF %.4f  D2 %.4f\n",
                  fsmr_metrics_accuracy(metrics), fsmr_metrics_dist(metrics, FSMR_CAT_AT),
                  fsmr_metrics_dist(metrics, FSMR_CAT_D1), fsmr_metrics_dist(metrics, FSMR_CAT_AF),
                  fsmr_metrics_dist(metrics, FSMR_CAT_D2));
    } else {
      for (auto& [sub, kind] : experiments) {
        if (!sub->parsed()) continue;
        ConfigPtr cfg = load_config(config_path);
        fsmr_table* table = nullptr;
        check(fsmr_run_experiment(cfg.get(), kind, seeds.empty() ? nullptr : seeds.data(),
                                  seeds.size(), print_epoch, &quiet, &table));
        TablePtr table_owner(table);
        check(fsmr_table_write_csv(table, out_path.c_str()));
        for (size_t i = 0; i < fsmr_table_rows(table); ++i) {
          const char* label = nullptr;
          const char* seed = nullptr;
          double val = 0.0, test = 0.0;
          check(fsmr_table_row(table, i, &label, &seed, &val, &test));
          std::printf("%-24s seed %-6s val %.4f  test %.4f\n", label, seed, val, test);
        }
      }
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", fsmr_last_error());
    return f.status;
  }
  return 0;
}
