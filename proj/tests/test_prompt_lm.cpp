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

#include <algorithm>
#include <cmath>

#include "fsmr/errors.hpp"
#include "fsmr/gradcheck.hpp"
#include "fsmr/ops.hpp"
#include "fsmr/params.hpp"
#include "fsmr/prompt_lm.hpp"
#include "test_util.hpp"

using namespace fsmr;
using fsmr::testing::random_tensor;

namespace {

struct LmFixture {
  LmDims dims;
  ParamStore params;
  Tensor h_img, align, h_v, h_w;

  explicit LmFixture(std::size_t d = 8, std::size_t m = 2, std::size_t n = 3) {
    dims.d = d;
    dims.heads = 2;
    dims.max_sequence_length = 40;
    Rng rng(21, "lm");
    add_lm_params(params, dims, rng);
    h_img = random_tensor(1, d, rng);
    align = random_tensor(1, d, rng);
    h_v = random_tensor(m, d, rng);
    h_w = random_tensor(n, d, rng);
  }

  PromptSequence assemble(Tape& tape, ParamBinder& bind, PromptMode mode) const {
    return assemble_prompt(bind, tape.constant(h_img), tape.constant(align), tape.constant(h_v),
                           tape.constant(h_w), mode, dims);
  }
};

}  // namespace

TEST_CASE("prompt lengths") {
  LmDims dims;
  CHECK(prompt_length(2, 3, PromptMode::kFull, dims) == 21);
  CHECK(prompt_length(2, 3, PromptMode::kNoTemplate, dims) == 9);
}

TEST_CASE("prompt layout and slot fidelity") {
  LmFixture f;
  Tape tape(false);
  ParamBinder bind(tape, f.params);
  auto seq = f.assemble(tape, bind, PromptMode::kFull);
  const Tensor& rows = seq.rows.value();
  REQUIRE(rows.rows() == 21);
  REQUIRE(seq.slot_map.size() == 21);
  CHECK(std::count(seq.slot_map.begin(), seq.slot_map.end(), Slot::kImgSlot) == 1);
  CHECK(std::count(seq.slot_map.begin(), seq.slot_map.end(), Slot::kAlignSlot) == 1);
  CHECK(std::count(seq.slot_map.begin(), seq.slot_map.end(), Slot::kTemplate) == 12);

  const std::vector<Slot> expected = {
      Slot::kCls,      Slot::kTemplate, Slot::kTemplate, Slot::kTemplate, Slot::kTemplate,
      Slot::kTemplate, Slot::kImgSlot,  Slot::kTemplate, Slot::kTemplate, Slot::kTemplate,
      Slot::kTemplate, Slot::kAlignSlot, Slot::kTemplate, Slot::kTemplate, Slot::kTemplate,
      Slot::kObj,      Slot::kObj,      Slot::kSep,      Slot::kWord,     Slot::kWord,
      Slot::kWord};
  CHECK(seq.slot_map == expected);

  for (std::size_t c = 0; c < f.dims.d; ++c) {
    CHECK(rows(6, c) == f.h_img[c]);
    CHECK(rows(11, c) == f.align[c]);
    CHECK(rows(15, c) == f.h_v(0, c));
    CHECK(rows(16, c) == f.h_v(1, c));
    CHECK(rows(18, c) == f.h_w(0, c));
    CHECK(rows(20, c) == f.h_w(2, c));
    CHECK(rows(0, c) == f.params.at("lm.cls")[c]);
    CHECK(rows(17, c) == f.params.at("lm.sep")[c]);
  }
}

TEST_CASE("no_template keeps the non-template rows in order") {
  LmFixture f;
  Tape tape(false);
  ParamBinder bind(tape, f.params);
  auto full = f.assemble(tape, bind, PromptMode::kFull);
  auto bare = f.assemble(tape, bind, PromptMode::kNoTemplate);
  REQUIRE(bare.rows.rows() == 9);
  std::size_t j = 0;
  for (std::size_t i = 0; i < full.slot_map.size(); ++i) {
    if (full.slot_map[i] == Slot::kTemplate) continue;
    CHECK(bare.slot_map[j] == full.slot_map[i]);
    for (std::size_t c = 0; c < f.dims.d; ++c) CHECK(bare.rows.value()(j, c) == full.rows.value()(i, c));
    ++j;
  }
  CHECK(j == 9);
}

TEST_CASE("prompt capacity") {
  LmFixture f(8, 2, 30);
  Tape tape(false);
  ParamBinder bind(tape, f.params);
  CHECK_THROWS_AS(f.assemble(tape, bind, PromptMode::kFull), CapacityError);
}

TEST_CASE("lm_forward shape, determinism and positional symmetry breaking") {
  LmFixture f;
  Tape tape(false);
  ParamBinder bind(tape, f.params);
  auto a = lm_forward(bind, f.assemble(tape, bind, PromptMode::kFull), f.dims).value();
  auto b = lm_forward(bind, f.assemble(tape, bind, PromptMode::kNoTemplate), f.dims).value();
  CHECK(a.shape() == Shape{1, 8});
  CHECK(b.shape() == Shape{1, 8});
  auto again = lm_forward(bind, f.assemble(tape, bind, PromptMode::kFull), f.dims).value();
  CHECK(a == again);

  ParamStore permuted = f.params;
  Tensor& t = permuted.at("lm.template");
  for (std::size_t c = 0; c < f.dims.d; ++c) std::swap(t(0, c), t(1, c));
  Tape tape2(false);
  ParamBinder bind2(tape2, permuted);
  auto p = lm_forward(bind2, f.assemble(tape2, bind2, PromptMode::kFull), f.dims).value();
  CHECK(max_abs_diff(a, p) > 1e-9);
}

TEST_CASE("gradient of sum(S_CLS) w.r.t. the image slot") {
  LmFixture f;
  const double err = grad_check(
      [&](Tape& tape, Var h_img) {
        ParamBinder bind(tape, f.params);
        auto seq = assemble_prompt(bind, h_img, tape.constant(f.align), tape.constant(f.h_v),
                                   tape.constant(f.h_w), PromptMode::kFull, f.dims);
        return ops::sum(lm_forward(bind, seq, f.dims));
      },
      f.h_img);
  CHECK(err < 1e-6);
}

TEST_CASE("lm parameters pass the gradient check") {
  LmFixture f(8, 2, 2);
  auto report = grad_check_params(
      [&](ParamBinder& bind) {
        Tape& tape = bind.tape();
        auto seq = assemble_prompt(bind, tape.constant(f.h_img), tape.constant(f.align),
                                   tape.constant(f.h_v), tape.constant(f.h_w), PromptMode::kFull,
                                   f.dims);
        auto logits = classify(lm_forward(bind, seq, f.dims), bind("lm.head.W"), bind("lm.head.b"));
        return ops::sum(ops::tanh(logits));
      },
      f.params);
  INFO(report.worst_param);
  CHECK(report.max_rel_error < 1e-6);
}

TEST_CASE("classify") {
  Tape tape(false);
  auto s = tape.constant(Tensor::row({0.4, -0.3, 0.2}));
  auto zero = classify(s, tape.constant(Tensor({3, 2})), tape.constant(Tensor({1, 2}))).value();
  CHECK(zero == Tensor::row({0, 0}));
  auto dom = classify(s, tape.constant(Tensor({3, 2})), tape.constant(Tensor::row({0, 10}))).value();
  CHECK(1.0 / (1.0 + std::exp(dom[0] - dom[1])) > 0.9999);

  Rng rng(5, "cls");
  Tensor x = random_tensor(1, 3, rng), W = random_tensor(3, 2, rng), b = random_tensor(1, 2, rng);
  auto l = classify(tape.constant(x), tape.constant(W), tape.constant(b)).value();
  for (std::size_t j = 0; j < 2; ++j) {
    double expect = b[j];
    for (std::size_t k = 0; k < 3; ++k) expect += x[k] * W(k, j);
    CHECK(std::abs(l[j] - expect) <= 1e-12);
  }
}
