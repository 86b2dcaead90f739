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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "fsmr/fsmr.h"

namespace fs = std::filesystem;

namespace {

const char* kSmallConfig =
    R"({"seed": 3, "d_model": 8, "lm_heads": 2, "attn_heads": 2, "max_sequence_length": 40,
        "num_train": 24, "num_val": 12, "num_test": 12, "epochs": 2})";

fs::path scratch() {
  auto dir = fs::temp_directory_path() / "fsmr_capi";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << s;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FSMR_CLI_PATH) + " -q " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

}  // namespace

TEST_CASE("config handles") {
  fsmr_config* cfg = nullptr;
  REQUIRE(fsmr_config_parse(kSmallConfig, &cfg) == FSMR_OK);
  size_t needed = 0;
  REQUIRE(fsmr_config_to_json(cfg, nullptr, 0, &needed) == FSMR_OK);
  std::string buf(needed + 1, '\0');
  REQUIRE(fsmr_config_to_json(cfg, buf.data(), buf.size(), &needed) == FSMR_OK);
  CHECK(std::string(buf.c_str()).find("\"d_model\":8") != std::string::npos);
  fsmr_config_free(cfg);

  fsmr_config* bad = nullptr;
  CHECK(fsmr_config_parse(R"({"sed": 1})", &bad) == FSMR_ERR_CONFIG);
  CHECK(std::string(fsmr_last_error()).find("sed") != std::string::npos);
  CHECK(bad == nullptr);
  CHECK(fsmr_config_parse("{not json", &bad) == FSMR_ERR_CONFIG);
  CHECK(fsmr_config_load("/nonexistent/cfg.json", &bad) == FSMR_ERR_CONFIG);
  CHECK(fsmr_config_parse(nullptr, &bad) == FSMR_ERR_CONFIG);
  fsmr_config_free(nullptr);
}

TEST_CASE("train, save, load, evaluate through the C API") {
  const fs::path dir = scratch() / "api";
  fs::create_directories(dir);
  fsmr_config* cfg = nullptr;
  REQUIRE(fsmr_config_parse(kSmallConfig, &cfg) == FSMR_OK);
  REQUIRE(fsmr_generate_splits(cfg, dir.c_str()) == FSMR_OK);

  fsmr_dataset* test = nullptr;
  REQUIRE(fsmr_dataset_read((dir / "test.jsonl").c_str(), &test) == FSMR_OK);
  CHECK(fsmr_dataset_size(test) == 12);

  int epochs_seen = 0;
  fsmr_model* model = nullptr;
  fsmr_metrics* metrics = nullptr;
  REQUIRE(fsmr_train(
              cfg, dir.c_str(),
              [](const char*, size_t, double loss, double, void* user) {
                CHECK(std::isfinite(loss));
                ++*static_cast<int*>(user);
              },
              &epochs_seen, &model, &metrics) == FSMR_OK);
  CHECK(epochs_seen == 2);
  CHECK(fsmr_metrics_epochs(metrics) == 2);
  double total = 0.0;
  for (int c = FSMR_CAT_AT; c <= FSMR_CAT_D2; ++c)
    total += fsmr_metrics_dist(metrics, static_cast<fsmr_category>(c));
  CHECK(std::abs(total - 1.0) <= 1e-9);

  const fs::path ckpt = dir / "m.ckpt";
  REQUIRE(fsmr_model_save(model, ckpt.c_str()) == FSMR_OK);
  fsmr_model* loaded = nullptr;
  REQUIRE(fsmr_model_load(ckpt.c_str(), &loaded) == FSMR_OK);
  fsmr_metrics* a = nullptr;
  fsmr_metrics* b = nullptr;
  REQUIRE(fsmr_evaluate(model, test, &a) == FSMR_OK);
  REQUIRE(fsmr_evaluate(loaded, test, &b) == FSMR_OK);
  CHECK(fsmr_metrics_accuracy(a) == fsmr_metrics_accuracy(b));
  CHECK(fsmr_metrics_accuracy(a) == fsmr_metrics_accuracy(metrics));
  size_t choice = 9;
  CHECK(fsmr_model_select(loaded, test, 0, &choice) == FSMR_OK);
  CHECK(choice < 4);
  CHECK(fsmr_model_select(loaded, test, 99, &choice) == FSMR_ERR_DATA);

  REQUIRE(fsmr_metrics_write_json(a, (dir / "m.json").c_str()) == FSMR_OK);
  REQUIRE(fsmr_metrics_write_csv(a, (dir / "m.csv").c_str()) == FSMR_OK);
  CHECK(slurp(dir / "m.json").find("\"loss_curve\"") != std::string::npos);

  std::string bytes = slurp(ckpt);
  spit(dir / "bad.ckpt", "XXXX" + bytes.substr(4));
  fsmr_model* bad = nullptr;
  CHECK(fsmr_model_load((dir / "bad.ckpt").c_str(), &bad) == FSMR_ERR_DATA);
  spit(dir / "short.ckpt", bytes.substr(0, bytes.size() / 2));
  CHECK(fsmr_model_load((dir / "short.ckpt").c_str(), &bad) == FSMR_ERR_DATA);
  CHECK(std::string(fsmr_last_error()).find("offset") != std::string::npos);
  CHECK(bad == nullptr);

  fsmr_metrics_free(a);
  fsmr_metrics_free(b);
  fsmr_metrics_free(metrics);
  fsmr_model_free(loaded);
  fsmr_model_free(model);
  fsmr_dataset_free(test);
  fsmr_config_free(cfg);
}

TEST_CASE("experiment tables") {
  fsmr_config* cfg = nullptr;
  REQUIRE(fsmr_config_parse(
              R"({"seed": 3, "d_model": 8, "lm_heads": 2, "attn_heads": 2,
                  "max_sequence_length": 40, "num_train": 12, "num_val": 8, "num_test": 8,
                  "epochs": 1})",
              &cfg) == FSMR_OK);
  fsmr_table* table = nullptr;
  REQUIRE(fsmr_run_experiment(cfg, FSMR_EXPERIMENT_SWEEP_ATTN, nullptr, 0, nullptr, nullptr,
                              &table) == FSMR_OK);
  CHECK(fsmr_table_rows(table) == 3);
  const char* label = nullptr;
  const char* seed = nullptr;
  double val = -1, test = -1;
  REQUIRE(fsmr_table_row(table, 2, &label, &seed, &val, &test) == FSMR_OK);
  CHECK(std::string(label) == "mixed");
  CHECK(std::string(seed) == "3");
  CHECK(val >= 0.0);
  CHECK(fsmr_table_row(table, 3, &label, &seed, &val, &test) == FSMR_ERR_CONFIG);
  const fs::path csv = scratch() / "attn.csv";
  REQUIRE(fsmr_table_write_csv(table, csv.c_str()) == FSMR_OK);
  CHECK(slurp(csv).rfind("attn_strategy,seed,val_accuracy,test_accuracy", 0) == 0);
  fsmr_table_free(table);
  fsmr_config_free(cfg);
}

TEST_CASE("cli exit codes") {
  const fs::path dir = scratch() / "cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  spit(dir / "cfg.json", kSmallConfig);
  spit(dir / "unknown.json", R"({"seed": 1, "colour": "blue"})");
  const std::string cfg = (dir / "cfg.json").string();
  const std::string data = (dir / "data").string();
  const std::string ckpt = (dir / "m.ckpt").string();

  CHECK(run_cli("") == 1);
  CHECK(run_cli("train --config " + cfg) == 1);
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("gen-data --config " + (dir / "unknown.json").string() + " --out " + data) == 1);

  REQUIRE(run_cli("gen-data --config " + cfg + " --out " + data) == 0);
  CHECK(fs::exists(fs::path(data) / "train.jsonl"));
  REQUIRE(run_cli("train --config " + cfg + " --data " + data + " --out " + ckpt) == 0);
  CHECK(fs::exists(ckpt + ".metrics.json"));
  const std::string out = (dir / "eval.json").string();
  REQUIRE(run_cli("eval --ckpt " + ckpt + " --data " + data + "/test.jsonl --out " + out) == 0);
  CHECK(fs::exists(dir / "eval.json"));
  CHECK(fs::exists(dir / "eval.csv"));

  const std::string bytes = slurp(ckpt);
  spit(dir / "magic.ckpt", "XXXX" + bytes.substr(4));
  spit(dir / "trunc.ckpt", bytes.substr(0, bytes.size() - 5));
  CHECK(run_cli("eval --ckpt " + (dir / "magic.ckpt").string() + " --data " + data +
                "/test.jsonl --out " + out) == 2);
  CHECK(run_cli("eval --ckpt " + (dir / "trunc.ckpt").string() + " --data " + data +
                "/test.jsonl --out " + out) == 2);
  spit(dir / "bad.jsonl", "{\"id\": \"x\"}\n");
  CHECK(run_cli("eval --ckpt " + ckpt + " --data " + (dir / "bad.jsonl").string() + " --out " +
                out) == 2);

  spit(dir / "tiny.json",
       R"({"seed": 3, "d_model": 8, "lm_heads": 2, "attn_heads": 2, "max_sequence_length": 40,
           "num_train": 8, "num_val": 4, "num_test": 4, "epochs": 1})");
  const std::string csv = (dir / "ablate.csv").string();
  REQUIRE(run_cli("ablate --config " + (dir / "tiny.json").string() + " --out " + csv +
                  " --seeds 1,2") == 0);
  const std::string table = slurp(csv);
  CHECK(table.find("\"-CE loss\",mean,") != std::string::npos);
  CHECK(std::count(table.begin(), table.end(), '\n') == 1 + 6 * 3);
}
