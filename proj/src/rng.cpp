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

#include "fsmr/rng.hpp"

#include <cmath>
#include <limits>

namespace fsmr {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Rng::Rng(std::uint64_t derived) : stream_seed_(derived), engine_(derived) {}

Rng::Rng(std::uint64_t seed, std::string_view stream)
    : Rng(splitmix64(splitmix64(seed) ^ fnv1a(stream))) {}

Rng Rng::split(std::string_view child) const {
  return Rng(splitmix64(stream_seed_ ^ fnv1a(child)));
}

// Distributions are built from raw engine output so sequences do not
// depend on the standard library's distribution implementations.
double Rng::uniform(double lo, double hi) {
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

double Rng::normal(double mean, double stddev) {
  double u1 = uniform(0.0, 1.0);
  while (u1 <= 0.0) u1 = uniform(0.0, 1.0);
  const double u2 = uniform(0.0, 1.0);
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

std::size_t Rng::index(std::size_t n) {
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return static_cast<std::size_t>(x % bound);
}

bool Rng::bernoulli(double p) { return uniform(0.0, 1.0) < p; }

}  // namespace fsmr
