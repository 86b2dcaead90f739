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

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fsmr/tape.hpp"
#include "fsmr/tensor.hpp"

namespace fsmr {

class Rng;

/// Named registry of trainable tensors, kept in insertion order so that
/// serialization and optimizer sweeps are deterministic.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor value;
  };

  ParamStore() = default;
  // Tapes hold pointers into the entries; copying gives fresh storage.
  ParamStore(const ParamStore&) = default;
  ParamStore& operator=(const ParamStore&) = default;
  ParamStore(ParamStore&&) noexcept = default;
  ParamStore& operator=(ParamStore&&) noexcept = default;

  Tensor& add(std::string name, Tensor value);
  /// Adds a parameter initialized uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  Tensor& add_uniform(std::string name, Shape shape, std::size_t fan_in, Rng& rng);

  bool contains(std::string_view name) const;
  Tensor& at(std::string_view name);
  const Tensor& at(std::string_view name) const;

  std::vector<Entry>& entries() noexcept { return entries_; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t scalar_count() const noexcept;

  ParamStore zeros_like() const;
  void zero();

  /// Same names, same order, same shapes.
  bool same_layout(const ParamStore& other) const;
  bool operator==(const ParamStore& other) const;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Lazily binds parameters of a store onto one tape, one leaf per name.
class ParamBinder {
 public:
  ParamBinder(Tape& tape, const ParamStore& params) : tape_(tape), params_(params) {}

  Var operator()(std::string_view name);
  Tape& tape() noexcept { return tape_; }
  const ParamStore& params() const noexcept { return params_; }

  /// Adds d(loss)/d(param) for every bound parameter into `grads`, which
  /// must share the store's layout. Call after Tape::backward.
  void accumulate_grads(ParamStore& grads, double scale = 1.0) const;

 private:
  Tape& tape_;
  const ParamStore& params_;
  std::unordered_map<std::string, Var> bound_;
};

}  // namespace fsmr
