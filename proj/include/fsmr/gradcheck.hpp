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

#include <functional>
#include <string>

#include "fsmr/params.hpp"
#include "fsmr/tape.hpp"

namespace fsmr {

/// Central-difference gradient oracle.
///
/// Error per coordinate is |analytic - numeric| / max(1, |numeric|); the
/// maximum over all checked coordinates is reported. The checked function
/// must be deterministic (no dropout) and return a finite 1 x 1 value.
double grad_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x, double h = 1e-5);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  std::size_t coordinates = 0;
};

/// Runs the oracle over every coordinate of every parameter in `params`.
/// `params` is perturbed in place and restored before returning.
GradCheckReport grad_check_params(const std::function<Var(ParamBinder&)>& f,
                                  ParamStore& params, double h = 1e-5);

}  // namespace fsmr
