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

#include "fsmr/tape.hpp"

#include "fsmr/errors.hpp"

namespace fsmr {

Tape::Tape(bool grad_enabled) : grad_enabled_(grad_enabled) { nodes_.reserve(512); }

Var Tape::leaf(Tensor value) {
  Node n;
  n.requires_grad = grad_enabled_ && value.requires_grad();
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant(Tensor value) {
  value.set_requires_grad(false);
  return leaf(std::move(value));
}

Var Tape::parameter(const Tensor& value) {
  Node n;
  n.external = &value;
  n.requires_grad = grad_enabled_;
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::record(Tensor value, std::span<const Var> parents, Backward backward) {
  bool needs = false;
  if (grad_enabled_) {
    for (const Var& p : parents) needs = needs || nodes_[p.id].requires_grad;
  }
  Node n;
  n.value = std::move(value);
  n.requires_grad = needs;
  if (needs) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tensor& Tape::grad(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.grad.shape() != value(id).shape()) n.grad = Tensor(value(id).shape());
  return n.grad;
}

const Tensor& Tape::grad(Var v) { return grad(v.id); }

void Tape::backward(Var loss) {
  if (loss.value().size() != 1) {
    throw NumericError("backward requires a scalar loss, got shape " +
                       shape_string(loss.value().shape()));
  }
  if (!nodes_[loss.id].requires_grad) return;
  grad(loss.id)[0] += 1.0;
  for (std::uint32_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.empty()) continue;
    n.backward(*this, i);
  }
}

}  // namespace fsmr
