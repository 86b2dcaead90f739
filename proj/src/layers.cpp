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

#include "fsmr/layers.hpp"

#include <cmath>

#include "fsmr/errors.hpp"
#include "fsmr/rng.hpp"

namespace fsmr::layers {

void add_linear(ParamStore& params, const std::string& name, std::size_t in, std::size_t out,
                Rng& rng) {
  params.add_uniform(name + ".W", {in, out}, in, rng);
  params.add_uniform(name + ".b", {1, out}, in, rng);
}

Var linear(ParamBinder& bind, const std::string& name, Var x) {
  return ops::linear(x, bind(name + ".W"), bind(name + ".b"));
}

void add_layer_norm(ParamStore& params, const std::string& name, std::size_t width) {
  params.add(name + ".gain", Tensor({1, width}, 1.0));
  params.add(name + ".bias", Tensor({1, width}, 0.0));
}

Var layer_norm(ParamBinder& bind, const std::string& name, Var x) {
  return ops::layer_norm(x, bind(name + ".gain"), bind(name + ".bias"));
}

void add_attention(ParamStore& params, const std::string& name, std::size_t d, Rng& rng) {
  for (const char* proj : {".q", ".k", ".v", ".o"}) add_linear(params, name + proj, d, d, rng);
}

Var attention(ParamBinder& bind, const std::string& name, Var query_src, Var kv_src,
              const AttentionOptions& opt) {
  const std::size_t d = query_src.cols();
  if (opt.heads == 0 || d % opt.heads != 0) {
    throw ConfigError("attention heads (" + std::to_string(opt.heads) +
                      ") must divide the model width (" + std::to_string(d) + ")");
  }
  if (opt.dropout > 0.0 && opt.rng == nullptr) {
    throw ConfigError("attention dropout requires a random stream");
  }
  const std::size_t dh = d / opt.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Var q = linear(bind, name + ".q", query_src);
  Var k = linear(bind, name + ".k", kv_src);
  Var v = linear(bind, name + ".v", kv_src);

  std::vector<Var> head_out;
  head_out.reserve(opt.heads);
  for (std::size_t h = 0; h < opt.heads; ++h) {
    Var qh = opt.heads == 1 ? q : ops::slice_cols(q, h * dh, (h + 1) * dh);
    Var kh = opt.heads == 1 ? k : ops::slice_cols(k, h * dh, (h + 1) * dh);
    Var vh = opt.heads == 1 ? v : ops::slice_cols(v, h * dh, (h + 1) * dh);
    Var probs = ops::softmax_rows(ops::scale(ops::matmul_nt(qh, kh), scale));
    if (opt.trace) opt.trace->weights.push_back(probs.value());
    if (opt.dropout > 0.0) probs = ops::dropout(probs, opt.dropout, *opt.rng);
    head_out.push_back(ops::matmul(probs, vh));
  }
  Var merged = opt.heads == 1 ? head_out[0] : ops::concat_cols(head_out);
  return linear(bind, name + ".o", merged);
}

}  // namespace fsmr::layers
