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

#include "fsmr/fsmr.h"

#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <new>
#include <string>

#include "fsmr/checkpoint.hpp"
#include "fsmr/config.hpp"
#include "fsmr/errors.hpp"
#include "fsmr/harness.hpp"
#include "fsmr/model.hpp"
#include "fsmr/synth_data.hpp"

struct fsmr_config {
  fsmr::RunConfig cfg;
};

struct fsmr_dataset {
  fsmr::Dataset data;
};

struct fsmr_model {
  fsmr::FsmrModel model;
};

struct fsmr_metrics {
  fsmr::Metrics metrics;
};

struct fsmr_table {
  fsmr::ResultTable rows;
  std::string label_header;
};

namespace {

thread_local std::string g_last_error;

template <class F>
fsmr_status guarded(F&& body) {
  try {
    body();
    return FSMR_OK;
  } catch (const fsmr::Error& e) {
    g_last_error = e.what();
    return static_cast<fsmr_status>(e.status());
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return FSMR_ERR_DATA;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return FSMR_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FSMR_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return FSMR_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw fsmr::ConfigError(std::string(what) + " must not be NULL");
}

void write_text(const char* path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw fsmr::DataError("cannot open '" + tmp.string() + "' for writing");
    out << text;
    if (!out) throw fsmr::DataError("failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

extern "C" {

const char* fsmr_version(void) { return "1.0.0"; }

const char* fsmr_last_error(void) { return g_last_error.c_str(); }

fsmr_status fsmr_config_default(fsmr_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new fsmr_config{};
  });
}

fsmr_status fsmr_config_load(const char* path, fsmr_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new fsmr_config{fsmr::RunConfig::load(path)};
  });
}

fsmr_status fsmr_config_parse(const char* json, fsmr_config** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json);
    } catch (const nlohmann::json::parse_error& e) {
      throw fsmr::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    *out = new fsmr_config{fsmr::RunConfig::from_json(j)};
  });
}

fsmr_status fsmr_config_set_data_dir(fsmr_config* cfg, const char* dir) {
  return guarded([&] {
    require(cfg, "cfg");
    cfg->cfg.data_dir = dir ? dir : "";
  });
}

fsmr_status fsmr_config_to_json(const fsmr_config* cfg, char* buf, size_t size, size_t* needed) {
  return guarded([&] {
    require(cfg, "cfg");
    const std::string text = cfg->cfg.to_json().dump();
    if (needed) *needed = text.size();
    if (buf && size) {
      const std::size_t n = std::min(size - 1, text.size());
      std::memcpy(buf, text.data(), n);
      buf[n] = '\0';
    }
  });
}

void fsmr_config_free(fsmr_config* cfg) { delete cfg; }

fsmr_status fsmr_generate_splits(const fsmr_config* cfg, const char* out_dir) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out_dir, "out_dir");
    fsmr::write_splits(fsmr::generate_splits(cfg->cfg), out_dir);
  });
}

fsmr_status fsmr_dataset_read(const char* path, fsmr_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new fsmr_dataset{fsmr::read_jsonl(path)};
  });
}

fsmr_status fsmr_dataset_write(const fsmr_dataset* data, const char* path) {
  return guarded([&] {
    require(data, "data");
    require(path, "path");
    fsmr::write_jsonl(data->data, path);
  });
}

size_t fsmr_dataset_size(const fsmr_dataset* data) { return data ? data->data.size() : 0; }

void fsmr_dataset_free(fsmr_dataset* data) { delete data; }

fsmr_status fsmr_train(const fsmr_config* cfg, const char* data_dir, fsmr_epoch_callback on_epoch,
                       void* user, fsmr_model** model, fsmr_metrics** metrics) {
  return guarded([&] {
    require(cfg, "cfg");
    fsmr::RunConfig run = cfg->cfg;
    if (data_dir) run.data_dir = data_dir;
    const fsmr::Splits splits = fsmr::resolve_splits(run);
    std::function<void(const fsmr::EpochReport&)> hook;
    if (on_epoch) {
      hook = [&](const fsmr::EpochReport& r) {
        on_epoch("", r.epoch, r.mean_loss, r.val_accuracy, user);
      };
    }
    fsmr::TrainResult result = fsmr::train(run, splits, hook);
    if (metrics) *metrics = new fsmr_metrics{result.test};
    if (model) *model = new fsmr_model{fsmr::FsmrModel(run, std::move(result.params))};
  });
}

fsmr_status fsmr_model_save(const fsmr_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    fsmr::save_checkpoint(model->model.params(), model->model.config(), path);
  });
}

fsmr_status fsmr_model_load(const char* path, fsmr_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    fsmr::LoadedCheckpoint ck = fsmr::load_checkpoint(path);
    *out = new fsmr_model{fsmr::FsmrModel(std::move(ck.config), std::move(ck.params))};
  });
}

fsmr_status fsmr_model_select(const fsmr_model* model, const fsmr_dataset* data, size_t index,
                              size_t* choice) {
  return guarded([&] {
    require(model, "model");
    require(data, "data");
    require(choice, "choice");
    if (index >= data->data.size()) throw fsmr::DataError("instance index out of range");
    fsmr::Dataset one{data->data[index]};
    if (model->model.config().image_blind) fsmr::zero_object_features(one);
    fsmr::check_compatible(model->model.config(), one);
    *choice = model->model.select_answer(one[0]);
  });
}

void fsmr_model_free(fsmr_model* model) { delete model; }

fsmr_status fsmr_evaluate(const fsmr_model* model, const fsmr_dataset* data, fsmr_metrics** out) {
  return guarded([&] {
    require(model, "model");
    require(data, "data");
    require(out, "out");
    if (model->model.config().image_blind) {
      fsmr::Dataset blind = data->data;
      fsmr::zero_object_features(blind);
      *out = new fsmr_metrics{fsmr::evaluate(model->model, blind)};
    } else {
      *out = new fsmr_metrics{fsmr::evaluate(model->model, data->data)};
    }
  });
}

double fsmr_metrics_accuracy(const fsmr_metrics* m) { return m ? m->metrics.accuracy : 0.0; }

double fsmr_metrics_dist(const fsmr_metrics* m, fsmr_category category) {
  if (!m || category < FSMR_CAT_AT || category > FSMR_CAT_D2) return 0.0;
  return m->metrics.dist[static_cast<std::size_t>(category)];
}

size_t fsmr_metrics_epochs(const fsmr_metrics* m) { return m ? m->metrics.loss_curve.size() : 0; }

fsmr_status fsmr_metrics_write_json(const fsmr_metrics* m, const char* path) {
  return guarded([&] {
    require(m, "metrics");
    require(path, "path");
    write_text(path, fsmr::metrics_json(m->metrics).dump(2) + "\n");
  });
}

fsmr_status fsmr_metrics_write_csv(const fsmr_metrics* m, const char* path) {
  return guarded([&] {
    require(m, "metrics");
    require(path, "path");
    write_text(path, fsmr::metrics_csv(m->metrics));
  });
}

void fsmr_metrics_free(fsmr_metrics* m) { delete m; }

fsmr_status fsmr_run_experiment(const fsmr_config* cfg, fsmr_experiment kind,
                                const uint64_t* seeds, size_t num_seeds,
                                fsmr_epoch_callback on_epoch, void* user, fsmr_table** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out, "out");
    std::vector<std::uint64_t> seed_list;
    if (seeds && num_seeds) {
      seed_list.assign(seeds, seeds + num_seeds);
    } else {
      seed_list.push_back(cfg->cfg.seed);
    }
    std::vector<std::pair<std::string, fsmr::RunConfig>> arms;
    std::string header;
    switch (kind) {
      case FSMR_EXPERIMENT_ABLATE:
        arms = fsmr::ablation_arms(cfg->cfg);
        header = "arm";
        break;
      case FSMR_EXPERIMENT_SWEEP_SWAP:
        arms = fsmr::swap_sweep_arms(cfg->cfg);
        header = "swap_strategy";
        break;
      case FSMR_EXPERIMENT_SWEEP_ATTN:
        arms = fsmr::attn_sweep_arms(cfg->cfg);
        header = "attn_strategy";
        break;
      default:
        throw fsmr::ConfigError("unknown experiment kind");
    }
    const fsmr::Splits splits = fsmr::resolve_splits(cfg->cfg);
    std::function<void(const std::string&, const fsmr::EpochReport&)> hook;
    if (on_epoch) {
      hook = [&](const std::string& label, const fsmr::EpochReport& r) {
        on_epoch(label.c_str(), r.epoch, r.mean_loss, r.val_accuracy, user);
      };
    }
    *out = new fsmr_table{fsmr::run_arms(arms, splits, seed_list, hook), header};
  });
}

size_t fsmr_table_rows(const fsmr_table* table) { return table ? table->rows.size() : 0; }

fsmr_status fsmr_table_row(const fsmr_table* table, size_t index, const char** label,
                           const char** seed, double* val_accuracy, double* test_accuracy) {
  return guarded([&] {
    require(table, "table");
    if (index >= table->rows.size()) throw fsmr::ConfigError("table row index out of range");
    const auto& row = table->rows[index];
    if (label) *label = row.label.c_str();
    if (seed) *seed = row.seed.c_str();
    if (val_accuracy) *val_accuracy = row.val_accuracy;
    if (test_accuracy) *test_accuracy = row.test_accuracy;
  });
}

fsmr_status fsmr_table_write_csv(const fsmr_table* table, const char* path) {
  return guarded([&] {
    require(table, "table");
    require(path, "path");
    write_text(path, fsmr::table_csv(table->rows, table->label_header));
  });
}

void fsmr_table_free(fsmr_table* table) { delete table; }

}  // extern "C"
