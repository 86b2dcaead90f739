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

#include "fsmr/config.hpp"

#include <fstream>
#include <functional>
#include <map>

#include "fsmr/errors.hpp"

namespace fsmr {

using nlohmann::json;

void RunConfig::validate() const {
  if (d_model == 0) throw ConfigError("d_model must be positive");
  if (lm_heads == 0 || d_model % lm_heads != 0) {
    throw ConfigError("lm_heads (" + std::to_string(lm_heads) + ") must divide d_model (" +
                      std::to_string(d_model) + ")");
  }
  attn.validate(d_model);
  train.validate();
  loss.validate();
  if (disable_itm && disable_ce) {
    throw ConfigError("disable_itm and disable_ce cannot both be set");
  }
  effective_loss().validate();
  if (max_sequence_length == 0) throw ConfigError("max_sequence_length must be positive");
  gen_config(0).validate();
  if (token_layout().vocab_size() > vocab_size) {
    throw ConfigError("vocab_size " + std::to_string(vocab_size) + " is below the " +
                      std::to_string(token_layout().vocab_size()) + " tokens the data layout needs");
  }
}

std::size_t RunConfig::itm_width() const {
  if (disable_xattn || attn.strategy == AttnStrategy::kMixed) return 2 * d_model;
  return d_model;
}

EncoderDims RunConfig::encoder_dims() const {
  return {d_model, d_visual, vocab_size, num_entity_types, max_sequence_length, lm_heads};
}

LmDims RunConfig::lm_dims() const {
  LmDims dims;
  dims.d = d_model;
  dims.heads = lm_heads;
  dims.layers = lm_layers;
  dims.max_sequence_length = max_sequence_length;
  return dims;
}

GenConfig RunConfig::gen_config(std::size_t num_instances) const {
  GenConfig g;
  g.num_instances = num_instances;
  g.min_entities = min_entities;
  g.max_entities = max_entities;
  g.num_entity_types = num_entity_types;
  g.num_relations = num_relations;
  g.num_attributes = num_attributes;
  g.d_visual = d_visual;
  g.noise_sigma = noise_sigma;
  g.feature_scale = feature_scale;
  g.seed = data_seed;
  return g;
}

json RunConfig::to_json() const {
  return json{
      {"seed", seed},
      {"d_model", d_model},
      {"d_visual", d_visual},
      {"vocab_size", vocab_size},
      {"num_entity_types", num_entity_types},
      {"lm_heads", lm_heads},
      {"lm_layers", lm_layers},
      {"max_sequence_length", max_sequence_length},
      {"swap_strategy", std::string(to_string(swap_strategy))},
      {"prompt_mode", std::string(to_string(prompt_mode))},
      {"attn_heads", attn.heads},
      {"attn_dropout", attn.dropout},
      {"attn_pooling", std::string(to_string(attn.pooling))},
      {"attn_strategy", std::string(to_string(attn.strategy))},
      {"loss_alpha", loss.alpha},
      {"loss_beta", loss.beta},
      {"learning_rate", train.learning_rate},
      {"weight_decay", train.weight_decay},
      {"epsilon", train.epsilon},
      {"rms_decay", train.rms_decay},
      {"epochs", train.epochs},
      {"batch_size", train.batch_size},
      {"disable_swap", disable_swap},
      {"disable_prompt_template", disable_prompt_template},
      {"disable_xattn", disable_xattn},
      {"disable_itm", disable_itm},
      {"disable_ce", disable_ce},
      {"image_blind", image_blind},
      {"data_dir", data_dir},
      {"num_train", num_train},
      {"num_val", num_val},
      {"num_test", num_test},
      {"data_seed", data_seed},
      {"min_entities", min_entities},
      {"max_entities", max_entities},
      {"num_relations", num_relations},
      {"num_attributes", num_attributes},
      {"noise_sigma", noise_sigma},
      {"feature_scale", feature_scale},
  };
}

namespace {

template <class T>
T typed(const json& v, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("config key '" + key + "' must be a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_unsigned()) {
        throw ConfigError("config key '" + key + "' must be a non-negative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
    } else {
      if (!v.is_string()) throw ConfigError("config key '" + key + "' must be a string");
    }
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  using Setter = std::function<void(const json&, const std::string&)>;
  auto num = [](auto& field) -> Setter {
    return [&field](const json& v, const std::string& k) {
      field = typed<std::remove_reference_t<decltype(field)>>(v, k);
    };
  };
  const std::map<std::string, Setter> setters = {
      {"seed", num(c.seed)},
      {"d_model", num(c.d_model)},
      {"d_visual", num(c.d_visual)},
      {"vocab_size", num(c.vocab_size)},
      {"num_entity_types", num(c.num_entity_types)},
      {"lm_heads", num(c.lm_heads)},
      {"lm_layers", num(c.lm_layers)},
      {"max_sequence_length", num(c.max_sequence_length)},
      {"swap_strategy",
       [&](const json& v, const std::string& k) {
         c.swap_strategy = parse_swap_strategy(typed<std::string>(v, k));
       }},
      {"prompt_mode",
       [&](const json& v, const std::string& k) {
         c.prompt_mode = parse_prompt_mode(typed<std::string>(v, k));
       }},
      {"attn_heads", num(c.attn.heads)},
      {"attn_dropout", num(c.attn.dropout)},
      {"attn_pooling",
       [&](const json& v, const std::string& k) {
         c.attn.pooling = parse_pooling(typed<std::string>(v, k));
       }},
      {"attn_strategy",
       [&](const json& v, const std::string& k) {
         c.attn.strategy = parse_attn_strategy(typed<std::string>(v, k));
       }},
      {"loss_alpha", num(c.loss.alpha)},
      {"loss_beta", num(c.loss.beta)},
      {"learning_rate", num(c.train.learning_rate)},
      {"weight_decay", num(c.train.weight_decay)},
      {"epsilon", num(c.train.epsilon)},
      {"rms_decay", num(c.train.rms_decay)},
      {"epochs", num(c.train.epochs)},
      {"batch_size", num(c.train.batch_size)},
      {"disable_swap", num(c.disable_swap)},
      {"disable_prompt_template", num(c.disable_prompt_template)},
      {"disable_xattn", num(c.disable_xattn)},
      {"disable_itm", num(c.disable_itm)},
      {"disable_ce", num(c.disable_ce)},
      {"image_blind", num(c.image_blind)},
      {"data_dir", num(c.data_dir)},
      {"num_train", num(c.num_train)},
      {"num_val", num(c.num_val)},
      {"num_test", num(c.num_test)},
      {"data_seed", num(c.data_seed)},
      {"min_entities", num(c.min_entities)},
      {"max_entities", num(c.max_entities)},
      {"num_relations", num(c.num_relations)},
      {"num_attributes", num(c.num_attributes)},
      {"noise_sigma", num(c.noise_sigma)},
      {"feature_scale", num(c.feature_scale)},
  };
  for (const auto& [key, value] : j.items()) {
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(value, key);
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

}  // namespace fsmr
