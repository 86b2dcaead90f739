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
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "fsmr/tensor.hpp"

namespace fsmr {

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while its tape lives.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  bool requires_grad() const;
};

/// Linear record of operations for reverse-mode differentiation.
///
/// Nodes are appended in evaluation order, so the record is topologically
/// sorted by construction. A tape built with grad disabled stores values
/// only and is used for evaluation.
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::uint32_t self)>;

  explicit Tape(bool grad_enabled = true);

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const noexcept { return grad_enabled_; }

  /// Leaf owning its value; participates in gradients iff the tensor's
  /// requires_grad flag is set.
  Var leaf(Tensor value);
  Var constant(Tensor value);
  /// Leaf that reads an externally-owned tensor (model parameters). The
  /// referenced tensor must outlive the tape and stay unmodified.
  Var parameter(const Tensor& value);

  Var record(Tensor value, std::span<const Var> parents, Backward backward);
  Var record(Tensor value, std::initializer_list<Var> parents, Backward backward) {
    return record(std::move(value), std::span<const Var>(parents.begin(), parents.size()),
                  std::move(backward));
  }

  const Tensor& value(std::uint32_t id) const {
    const Node& n = nodes_[id];
    return n.external ? *n.external : n.value;
  }
  bool requires_grad(std::uint32_t id) const { return nodes_[id].requires_grad; }

  /// Gradient accumulator of a node, zero-initialized on first access.
  Tensor& grad(std::uint32_t id);
  const Tensor& grad(Var v);

  /// Seeds d(loss)/d(loss) = 1 and runs every recorded backward closure in
  /// reverse order. Throws NumericError unless loss is 1 x 1.
  void backward(Var loss);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    const Tensor* external = nullptr;
    Tensor grad;
    bool requires_grad = false;
    Backward backward;
  };

  bool grad_enabled_;
  std::vector<Node> nodes_;
};

inline const Tensor& Var::value() const { return tape->value(id); }
inline bool Var::requires_grad() const { return tape->requires_grad(id); }

}  // namespace fsmr
