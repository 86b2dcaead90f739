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

#include <cstddef>
#include <span>
#include <vector>

#include "fsmr/tape.hpp"

namespace fsmr {
class Rng;
}

/// Differentiable operations on tape variables. All operands are rank-2;
/// vectors are 1 x d rows.
namespace fsmr::ops {

Var matmul(Var a, Var b);     // a[r x k] . b[k x c]
Var matmul_nt(Var a, Var b);  // a[r x k] . b[c x k]^T
/// x . w + bias, with bias broadcast over rows.
Var linear(Var x, Var w, Var bias);

Var add(Var a, Var b);
Var add_row(Var a, Var bias);
Var scale(Var a, double s);

enum class Unary { kTanh, kSigmoid, kRelu, kGelu };
Var elementwise(Unary op, Var x);
inline Var tanh(Var x) { return elementwise(Unary::kTanh, x); }
inline Var sigmoid(Var x) { return elementwise(Unary::kSigmoid, x); }
inline Var relu(Var x) { return elementwise(Unary::kRelu, x); }
inline Var gelu(Var x) { return elementwise(Unary::kGelu, x); }

/// Row-wise softmax with max subtraction.
Var softmax_rows(Var x);
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);

Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
inline Var concat_rows(std::initializer_list<Var> parts) {
  return concat_rows(std::span<const Var>(parts.begin(), parts.size()));
}
inline Var concat_cols(std::initializer_list<Var> parts) {
  return concat_cols(std::span<const Var>(parts.begin(), parts.size()));
}
Var slice_rows(Var x, std::size_t begin, std::size_t end);
Var slice_cols(Var x, std::size_t begin, std::size_t end);
/// Output row t is row idx[t] of x. Repeated indices accumulate gradient.
Var gather_rows(Var x, std::span<const std::size_t> idx);

Var mean_rows(Var x);
Var max_rows(Var x);
Var sum(Var x);

/// Inverted dropout: keeps each entry with probability 1 - rate and scales
/// survivors by 1 / (1 - rate). Identity when rate == 0.
Var dropout(Var x, double rate, Rng& rng);

/// Plain kernels shared with oracles-free code paths.
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t r, std::size_t k, std::size_t n);

}  // namespace fsmr::ops
