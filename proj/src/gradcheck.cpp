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

#include "fsmr/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "fsmr/errors.hpp"

namespace fsmr {

namespace {

double finite_scalar(const Tensor& t) {
  const double v = t.item();
  if (!std::isfinite(v)) throw NumericError("grad_check: function returned a non-finite value");
  return v;
}

double rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
}

}  // namespace

double grad_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x, double h) {
  Tensor analytic;
  {
    Tape tape;
    Tensor leaf = x;
    leaf.set_requires_grad(true);
    Var xv = tape.leaf(std::move(leaf));
    Var y = f(tape, xv);
    finite_scalar(y.value());
    tape.backward(y);
    analytic = tape.grad(xv);
  }
  auto eval = [&](const Tensor& at) {
    Tape tape(false);
    Var xv = tape.constant(at);
    return finite_scalar(f(tape, xv).value());
  };
  double worst = 0.0;
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = eval(probe);
    probe[i] = x[i] - h;
    const double down = eval(probe);
    probe[i] = x[i];
    worst = std::max(worst, rel_error(analytic[i], (up - down) / (2.0 * h)));
  }
  return worst;
}

GradCheckReport grad_check_params(const std::function<Var(ParamBinder&)>& f,
                                  ParamStore& params, double h) {
  ParamStore analytic = params.zeros_like();
  {
    Tape tape;
    ParamBinder bind(tape, params);
    Var y = f(bind);
    finite_scalar(y.value());
    tape.backward(y);
    bind.accumulate_grads(analytic);
  }
  auto eval = [&]() {
    Tape tape(false);
    ParamBinder bind(tape, params);
    return finite_scalar(f(bind).value());
  };
  GradCheckReport report;
  for (std::size_t e = 0; e < params.size(); ++e) {
    Tensor& p = params.entries()[e].value;
    const Tensor& a = analytic.entries()[e].value;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double orig = p[i];
      p[i] = orig + h;
      const double up = eval();
      p[i] = orig - h;
      const double down = eval();
      p[i] = orig;
      const double err = rel_error(a[i], (up - down) / (2.0 * h));
      ++report.coordinates;
      if (err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst_param = params.entries()[e].name;
        report.worst_index = i;
      }
    }
  }
  return report;
}

}  // namespace fsmr
