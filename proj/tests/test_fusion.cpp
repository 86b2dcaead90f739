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

#include <doctest.h>

#include <cmath>

#include "fsmr/errors.hpp"
#include "fsmr/fusion.hpp"
#include "fsmr/ops.hpp"
#include "fsmr/rng.hpp"
#include "test_util.hpp"

using namespace fsmr;
using fsmr::testing::random_tensor;

namespace {

const Tensor kWords = Tensor::from_rows({{1, 1}, {2, 2}, {3, 3}});
const Tensor kObjects = Tensor::from_rows({{10, 10}, {20, 20}});

}  // namespace

TEST_CASE("bidirectional swap by hand") {
  Rng rng(0, "swap");
  std::vector<AlignmentPair> pairs{{1, 0}};
  auto out = swap_features(kWords, kObjects, pairs, SwapStrategy::kBidirectional, rng);
  CHECK(out.h_w == Tensor::from_rows({{1, 1}, {10, 10}, {3, 3}}));
  CHECK(out.h_v == Tensor::from_rows({{2, 2}, {20, 20}}));
}

TEST_CASE("one-sided strategies leave the other side untouched") {
  Rng rng(0, "swap");
  std::vector<AlignmentPair> pairs{{0, 1}, {2, 0}};
  auto i2t = swap_features(kWords, kObjects, pairs, SwapStrategy::kImageToText, rng);
  CHECK(i2t.h_v == kObjects);
  CHECK(i2t.h_w == Tensor::from_rows({{20, 20}, {2, 2}, {10, 10}}));
  auto t2i = swap_features(kWords, kObjects, pairs, SwapStrategy::kTextToImage, rng);
  CHECK(t2i.h_w == kWords);
  CHECK(t2i.h_v == Tensor::from_rows({{3, 3}, {1, 1}}));
  auto none = swap_features(kWords, kObjects, pairs, SwapStrategy::kNone, rng);
  CHECK(none.h_w == kWords);
  CHECK(none.h_v == kObjects);
}

TEST_CASE("empty pair list is the identity for every strategy") {
  Rng rng(0, "swap");
  for (auto s : {SwapStrategy::kNone, SwapStrategy::kImageToText, SwapStrategy::kTextToImage,
                 SwapStrategy::kBidirectional, SwapStrategy::kHybrid}) {
    auto out = swap_features(kWords, kObjects, {}, s, rng);
    CHECK(out.h_w == kWords);
    CHECK(out.h_v == kObjects);
  }
}

TEST_CASE("bidirectional twice restores the input") {
  Rng rng(1, "swap");
  Tensor w = random_tensor(5, 3, rng), v = random_tensor(3, 3, rng);
  std::vector<AlignmentPair> pairs{{0, 2}, {3, 0}};
  auto once = swap_features(w, v, pairs, SwapStrategy::kBidirectional, rng);
  auto twice = swap_features(once.h_w, once.h_v, pairs, SwapStrategy::kBidirectional, rng);
  CHECK(twice.h_w == w);
  CHECK(twice.h_v == v);
}

TEST_CASE("shared objects: the first pair decides the object row") {
  auto plan = plan_swap(4, 2, std::vector<AlignmentPair>{{1, 0}, {3, 0}},
                        SwapStrategy::kBidirectional);
  CHECK(plan.word_rows == std::vector<std::size_t>{0, 4, 2, 4});
  CHECK(plan.object_rows == std::vector<std::size_t>{1, 5});
}

TEST_CASE("swap errors") {
  Rng rng(0, "swap");
  std::vector<AlignmentPair> bad{{3, 0}};
  CHECK_THROWS_AS(swap_features(kWords, kObjects, bad, SwapStrategy::kBidirectional, rng),
                  DataError);
  CHECK_THROWS_AS(plan_swap(3, 2, {}, SwapStrategy::kHybrid), ConfigError);
  CHECK_THROWS_AS(parse_swap_strategy("sideways"), ConfigError);
  CHECK(parse_swap_strategy("imagetotext") == SwapStrategy::kImageToText);
  CHECK(to_string(SwapStrategy::kTextToImage) == "texttoimage");
}

TEST_CASE("hybrid draws from the four concrete strategies") {
  Rng rng(9, "hybrid");
  std::array<int, 5> seen{};
  for (int i = 0; i < 400; ++i) ++seen[static_cast<int>(sample_hybrid(rng))];
  CHECK(seen[static_cast<int>(SwapStrategy::kHybrid)] == 0);
  for (auto s : {SwapStrategy::kNone, SwapStrategy::kImageToText, SwapStrategy::kTextToImage,
                 SwapStrategy::kBidirectional}) {
    CHECK(seen[static_cast<int>(s)] > 60);
  }
}

TEST_CASE("var swap gradients route to the source rows") {
  Tape tape;
  auto w = tape.leaf(Tensor(kWords).set_requires_grad(true));
  auto v = tape.leaf(Tensor(kObjects).set_requires_grad(true));
  std::vector<AlignmentPair> pairs{{1, 0}};
  auto s = swap_features(w, v, pairs, SwapStrategy::kBidirectional);
  auto weights = tape.constant(Tensor::from_rows({{1, 1}, {2, 2}, {3, 3}}));
  auto weights_v = tape.constant(Tensor::from_rows({{5, 5}, {7, 7}}));
  auto loss = ops::add(ops::sum(ops::matmul_nt(ops::scale(s.h_w, 1.0), ops::scale(weights, 1.0))),
                       ops::sum(ops::matmul_nt(s.h_v, weights_v)));
  tape.backward(loss);
  // Word row 1 now lives in h_v row 0, and object row 0 in h_w row 1.
  CHECK(tape.grad(w)(1, 0) == 12.0);
  CHECK(tape.grad(v)(0, 0) == 6.0);
}

TEST_CASE("align") {
  Tape tape(false);
  auto h = tape.constant(Tensor::row({0.3, -0.1}));
  auto g = tape.constant(Tensor::row({0.8, 0.4}));
  auto zero = align(h, g, tape.constant(Tensor({4, 2})), tape.constant(Tensor({1, 2})));
  CHECK(zero.value() == Tensor({1, 2}, 0.0));
  auto big = align(h, g, tape.constant(Tensor({4, 2})), tape.constant(Tensor::row({50, -50})));
  CHECK(std::abs(big.value()[0]) <= 1.0);
  CHECK(big.value()[0] > 0.999);
  CHECK(big.value()[1] < -0.999);

  Rng rng(4, "align");
  const std::size_t d = 4;
  Tensor hc = random_tensor(1, d, rng), hi = random_tensor(1, d, rng);
  Tensor W = random_tensor(2 * d, d, rng), b = random_tensor(1, d, rng);
  auto a = align(tape.constant(hc), tape.constant(hi), tape.constant(W), tape.constant(b)).value();
  for (std::size_t j = 0; j < d; ++j) {
    double s = b[j];
    for (std::size_t k = 0; k < d; ++k) s += hc[k] * W(k, j) + hi[k] * W(d + k, j);
    CHECK(std::abs(a[j] - std::tanh(s)) <= 1e-12);
  }
}
