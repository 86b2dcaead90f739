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
#include "fsmr/gradcheck.hpp"
#include "fsmr/layers.hpp"
#include "fsmr/ops.hpp"
#include "fsmr/params.hpp"
#include "fsmr/xattn.hpp"
#include "test_util.hpp"

using namespace fsmr;
using fsmr::testing::random_tensor;

namespace {

AttentionConfig eval_config(AttnStrategy s = AttnStrategy::kMixed, std::size_t heads = 2) {
  AttentionConfig cfg;
  cfg.heads = heads;
  cfg.dropout = 0.0;
  cfg.strategy = s;
  return cfg;
}

Tensor linear_by_hand(const Tensor& x, const Tensor& W, const Tensor& b) {
  Tensor out({x.rows(), W.cols()});
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < W.cols(); ++j) {
      double s = b[j];
      for (std::size_t k = 0; k < x.cols(); ++k) s += x(i, k) * W(k, j);
      out(i, j) = s;
    }
  return out;
}

}  // namespace

TEST_CASE("single key attends with weight one") {
  ParamStore params;
  Rng rng(1, "xattn");
  const std::size_t d = 4;
  AttentionConfig cfg = eval_config(AttnStrategy::kMixed);
  add_xattn_params(params, d, cfg, rng);
  Tensor w = random_tensor(1, d, rng), v = random_tensor(1, d, rng);
  Tape tape(false);
  ParamBinder bind(tape, params);
  auto x = cross_attention(bind, tape.constant(w), tape.constant(v), cfg, false, nullptr, true);
  for (const Tensor& weights : x.trace_w.weights) CHECK(weights == Tensor({1, 1}, 1.0));
  Tensor value = linear_by_hand(v, params.at("xattn.lang.v.W"), params.at("xattn.lang.v.b"));
  Tensor expect = linear_by_hand(value, params.at("xattn.lang.o.W"), params.at("xattn.lang.o.b"));
  CHECK(max_abs_diff(x.o_w->value(), expect) <= 1e-12);
}

TEST_CASE("duplicating the key/value rows leaves the output unchanged") {
  ParamStore params;
  Rng rng(2, "xattn");
  const std::size_t d = 4;
  AttentionConfig cfg = eval_config(AttnStrategy::kLanguageOnly);
  add_xattn_params(params, d, cfg, rng);
  Tensor w = random_tensor(3, d, rng), v = random_tensor(2, d, rng);
  Tensor vv({4, d});
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < d; ++c) vv(r, c) = v(r % 2, c);
  Tape tape(false);
  ParamBinder bind(tape, params);
  auto a = cross_attention(bind, tape.constant(w), tape.constant(v), cfg, false, nullptr);
  auto b = cross_attention(bind, tape.constant(w), tape.constant(vv), cfg, false, nullptr);
  CHECK(max_abs_diff(a.o_w->value(), b.o_w->value()) <= 1e-12);
  CHECK_FALSE(a.o_v.has_value());
}

TEST_CASE("one head, d=2, by hand") {
  ParamStore params;
  params.add("h.q.W", Tensor::from_rows({{1.0, 0.5}, {-0.5, 2.0}}));
  params.add("h.q.b", Tensor::row({0.1, 0.0}));
  params.add("h.k.W", Tensor::from_rows({{0.3, -1.0}, {0.7, 0.2}}));
  params.add("h.k.b", Tensor::row({0.0, -0.2}));
  params.add("h.v.W", Tensor::from_rows({{2.0, 0.0}, {1.0, -1.0}}));
  params.add("h.v.b", Tensor::row({0.5, 0.5}));
  params.add("h.o.W", Tensor::from_rows({{1.0, 0.0}, {0.0, 1.0}}));
  params.add("h.o.b", Tensor::row({0.0, 0.0}));
  const Tensor q_src = Tensor::from_rows({{1.0, 2.0}, {-1.0, 0.5}});
  const Tensor kv_src = Tensor::from_rows({{0.2, -0.3}, {1.5, 1.0}});

  // Projections.
  const double q[2][2] = {{1.0 * 1.0 + 2.0 * -0.5 + 0.1, 1.0 * 0.5 + 2.0 * 2.0},
                          {-1.0 * 1.0 + 0.5 * -0.5 + 0.1, -1.0 * 0.5 + 0.5 * 2.0}};
  const double k[2][2] = {{0.2 * 0.3 + -0.3 * 0.7, 0.2 * -1.0 + -0.3 * 0.2 - 0.2},
                          {1.5 * 0.3 + 1.0 * 0.7, 1.5 * -1.0 + 1.0 * 0.2 - 0.2}};
  const double v[2][2] = {{0.2 * 2.0 + -0.3 * 1.0 + 0.5, -0.3 * -1.0 + 0.5},
                          {1.5 * 2.0 + 1.0 * 1.0 + 0.5, 1.0 * -1.0 + 0.5}};
  double expect[2][2];
  for (int i = 0; i < 2; ++i) {
    double s[2];
    for (int j = 0; j < 2; ++j) s[j] = (q[i][0] * k[j][0] + q[i][1] * k[j][1]) / std::sqrt(2.0);
    const double mx = std::max(s[0], s[1]);
    const double e0 = std::exp(s[0] - mx), e1 = std::exp(s[1] - mx);
    const double p0 = e0 / (e0 + e1), p1 = e1 / (e0 + e1);
    for (int c = 0; c < 2; ++c) expect[i][c] = p0 * v[0][c] + p1 * v[1][c];
  }
  Tape tape(false);
  ParamBinder bind(tape, params);
  auto out = layers::attention(bind, "h", tape.constant(q_src), tape.constant(kv_src),
                               {.heads = 1}).value();
  for (int i = 0; i < 2; ++i)
    for (int c = 0; c < 2; ++c) CHECK(std::abs(out(i, c) - expect[i][c]) <= 1e-12);
}

TEST_CASE("pool") {
  Tape tape(false);
  auto m = tape.constant(Tensor::from_rows({{1, 3}, {3, 1}}));
  CHECK(pool(m, Pooling::kMean).value() == Tensor::row({2, 2}));
  CHECK(pool(m, Pooling::kMax).value() == Tensor::row({3, 3}));
  auto one = tape.constant(Tensor::row({4, -2}));
  CHECK(pool(one, Pooling::kMean).value() == Tensor::row({4, -2}));
  CHECK(pool(one, Pooling::kMax).value() == Tensor::row({4, -2}));
  CHECK_THROWS_AS(pool(tape.constant(Tensor({0, 2})), Pooling::kMean), NumericError);
}

TEST_CASE("fuse") {
  Tape tape(false);
  auto pw = tape.constant(Tensor::row({1, 2}));
  auto pv = tape.constant(Tensor::row({3, 4}));
  CHECK(fuse(pw, pv, AttnStrategy::kMixed).value() == Tensor::row({1, 2, 3, 4}));
  CHECK(fuse(std::nullopt, pv, AttnStrategy::kVisualOnly).value() == Tensor::row({3, 4}));
  CHECK(fuse(pw, std::nullopt, AttnStrategy::kLanguageOnly).value() == Tensor::row({1, 2}));
  CHECK_THROWS_AS(fuse(pw, std::nullopt, AttnStrategy::kMixed), NumericError);
  CHECK_THROWS_AS(fuse(std::nullopt, std::nullopt, AttnStrategy::kVisualOnly), NumericError);
}

TEST_CASE("itm_head") {
  Tape tape(false);
  auto s = tape.constant(Tensor::row({0.5, -1.0, 2.0}));
  CHECK(itm_head(s, tape.constant(Tensor({3, 1})), tape.constant(Tensor({1, 1}))).value().item() ==
        0.5);
  const double low =
      itm_head(s, tape.constant(Tensor({3, 1})), tape.constant(Tensor::scalar(-40.0))).value().item();
  CHECK(low > 0.0);
  CHECK(low < 1e-16);

  Rng rng(3, "itm");
  Tensor x = random_tensor(1, 3, rng), W = random_tensor(3, 1, rng), b = random_tensor(1, 1, rng);
  const double z = b[0] + x[0] * W[0] + x[1] * W[1] + x[2] * W[2];
  const double got = itm_head(tape.constant(x), tape.constant(W), tape.constant(b)).value().item();
  CHECK(std::abs(got - 1.0 / (1.0 + std::exp(-z))) <= 1e-12);

  CHECK_THROWS_AS(itm_head(s, tape.constant(Tensor({2, 1})), tape.constant(Tensor({1, 1}))),
                  ConfigError);
}

TEST_CASE("dropout acts only in training") {
  ParamStore params;
  Rng rng(4, "xattn");
  const std::size_t d = 4;
  AttentionConfig cfg = eval_config(AttnStrategy::kMixed);
  cfg.dropout = 0.5;
  add_xattn_params(params, d, cfg, rng);
  Tensor w = random_tensor(3, d, rng), v = random_tensor(2, d, rng);
  Tape tape(false);
  ParamBinder bind(tape, params);
  Rng drop_a(1, "drop"), drop_b(1, "drop");
  auto e1 = cross_attention(bind, tape.constant(w), tape.constant(v), cfg, false, &drop_a);
  auto e2 = cross_attention(bind, tape.constant(w), tape.constant(v), cfg, false, nullptr);
  CHECK(e1.o_w->value() == e2.o_w->value());
  auto t1 = cross_attention(bind, tape.constant(w), tape.constant(v), cfg, true, &drop_b);
  CHECK(t1.o_w->value() != e1.o_w->value());
}

TEST_CASE("cross-attention parameters pass the gradient check") {
  ParamStore params;
  Rng rng(6, "xattn");
  const std::size_t d = 4;
  AttentionConfig cfg = eval_config(AttnStrategy::kMixed);
  add_xattn_params(params, d, cfg, rng);
  add_itm_params(params, 2 * d, rng);
  Tensor w = random_tensor(3, d, rng), v = random_tensor(2, d, rng);
  auto report = grad_check_params(
      [&](ParamBinder& bind) {
        Tape& tape = bind.tape();
        auto x = cross_attention(bind, tape.constant(w), tape.constant(v), cfg, false, nullptr);
        auto s = fuse(pool(*x.o_w, Pooling::kMean), pool(*x.o_v, Pooling::kMean), cfg.strategy);
        return ops::sum(itm_head(s, bind("itm.W"), bind("itm.b")));
      },
      params);
  INFO(report.worst_param);
  CHECK(report.max_rel_error < 1e-6);
}

TEST_CASE("attention config validation") {
  AttentionConfig cfg;
  cfg.heads = 3;
  CHECK_THROWS_AS(cfg.validate(8), ConfigError);
  cfg.heads = 4;
  cfg.dropout = 1.0;
  CHECK_THROWS_AS(cfg.validate(8), ConfigError);
  CHECK(parse_attn_strategy("visual_only") == AttnStrategy::kVisualOnly);
  CHECK_THROWS_AS(parse_attn_strategy("both"), ConfigError);
  CHECK_THROWS_AS(parse_pooling("sum"), ConfigError);
}
