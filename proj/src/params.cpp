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

#include "fsmr/params.hpp"

#include <cmath>

#include "fsmr/errors.hpp"
#include "fsmr/rng.hpp"

namespace fsmr {

Tensor& ParamStore::add(std::string name, Tensor value) {
  if (index_.count(name)) throw ConfigError("duplicate parameter name '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.push_back(Entry{std::move(name), std::move(value)});
  return entries_.back().value;
}

Tensor& ParamStore::add_uniform(std::string name, Shape shape, std::size_t fan_in, Rng& rng) {
  Tensor t(std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& v : t.data()) v = rng.uniform(-bound, bound);
  return add(std::move(name), std::move(t));
}

bool ParamStore::contains(std::string_view name) const {
  return index_.count(std::string(name)) != 0;
}

Tensor& ParamStore::at(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw ConfigError("unknown parameter '" + std::string(name) + "'");
  return entries_[it->second].value;
}

const Tensor& ParamStore::at(std::string_view name) const {
  return const_cast<ParamStore*>(this)->at(name);
}

std::size_t ParamStore::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

ParamStore ParamStore::zeros_like() const {
  ParamStore out;
  for (const auto& e : entries_) out.add(e.name, Tensor(e.value.shape()));
  return out;
}

void ParamStore::zero() {
  for (auto& e : entries_) e.value.fill(0.0);
}

bool ParamStore::same_layout(const ParamStore& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name) return false;
    if (entries_[i].value.shape() != other.entries_[i].value.shape()) return false;
  }
  return true;
}

bool ParamStore::operator==(const ParamStore& other) const {
  if (!same_layout(other)) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!(entries_[i].value == other.entries_[i].value)) return false;
  }
  return true;
}

Var ParamBinder::operator()(std::string_view name) {
  std::string key(name);
  auto it = bound_.find(key);
  if (it != bound_.end()) return it->second;
  Var v = tape_.parameter(params_.at(name));
  bound_.emplace(std::move(key), v);
  return v;
}

void ParamBinder::accumulate_grads(ParamStore& grads, double scale) const {
  for (const auto& [name, var] : bound_) {
    if (!var.requires_grad()) continue;
    Tensor& dst = grads.at(name);
    const Tensor& g = tape_.grad(var.id);
    if (dst.shape() != g.shape()) {
      throw ShapeError("gradient shape mismatch for parameter '" + name + "'");
    }
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += scale * g[i];
  }
}

}  // namespace fsmr
