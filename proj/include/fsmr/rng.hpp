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

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace fsmr {

/// Seeded generator addressed by stream name. Two generators built from
/// the same (seed, name) produce identical sequences; distinct names give
/// independent streams, so every consumer owns its own.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view stream);

  Rng split(std::string_view child) const;

  double uniform(double lo, double hi);
  double normal(double mean = 0.0, double stddev = 1.0);
  std::size_t index(std::size_t n);  // uniform in [0, n)
  bool bernoulli(double p);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

  std::uint64_t stream_seed() const noexcept { return stream_seed_; }

 private:
  explicit Rng(std::uint64_t derived);
  std::uint64_t stream_seed_;
  std::mt19937_64 engine_;
};

}  // namespace fsmr
