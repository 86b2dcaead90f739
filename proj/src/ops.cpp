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

#include "fsmr/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "fsmr/errors.hpp"
#include "fsmr/rng.hpp"

namespace fsmr::ops {

namespace {

void require_same_tape(Var a, Var b) {
  if (a.tape != b.tape) throw ShapeError("operands recorded on different tapes");
}

// c[r x n] += a[r x k] . b[k x n]
void gemm_nn_acc(const double* a, const double* b, double* c, std::size_t r, std::size_t k,
                 std::size_t n) {
  for (std::size_t i = 0; i < r; ++i) {
    double* ci = c + i * n;
    const double* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ai[p];
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

// c[r x n] += a[r x k] . b[n x k]^T
void gemm_nt_acc(const double* a, const double* b, double* c, std::size_t r, std::size_t k,
                 std::size_t n) {
  for (std::size_t i = 0; i < r; ++i) {
    const double* ai = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
      c[i * n + j] += s;
    }
  }
}

// c[r x n] += a[k x r]^T . b[k x n]
void gemm_tn_acc(const double* a, const double* b, double* c, std::size_t r, std::size_t k,
                 std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* ap = a + p * r;
    const double* bp = b + p * n;
    for (std::size_t i = 0; i < r; ++i) {
      const double av = ap[i];
      double* ci = c + i * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw ShapeError(std::string(op) + " expects a matrix, got shape " + shape_string(t.shape()));
  }
}

}  // namespace

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t r, std::size_t k, std::size_t n) {
  std::fill(c.begin(), c.end(), 0.0);
  gemm_nn_acc(a.data(), b.data(), c.data(), r, k, n);
}

Var matmul(Var a, Var b) {
  require_same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank2(av, "matmul");
  require_rank2(bv, "matmul");
  if (av.cols() != bv.rows()) {
    throw ShapeError("matmul dimension mismatch: " + shape_string(av.shape()) + " x " +
                     shape_string(bv.shape()));
  }
  const std::size_t r = av.rows(), k = av.cols(), c = bv.cols();
  Tensor out({r, c});
  gemm_nn_acc(av.data().data(), bv.data().data(), out.data().data(), r, k, c);
  return a.tape->record(std::move(out), {a, b}, [a, b, r, k, c](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    if (t.requires_grad(a.id)) {
      gemm_nt_acc(g.data().data(), t.value(b.id).data().data(), t.grad(a.id).data().data(), r,
                  c, k);
    }
    if (t.requires_grad(b.id)) {
      gemm_tn_acc(t.value(a.id).data().data(), g.data().data(), t.grad(b.id).data().data(), k,
                  r, c);
    }
  });
}

Var matmul_nt(Var a, Var b) {
  require_same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank2(av, "matmul_nt");
  require_rank2(bv, "matmul_nt");
  if (av.cols() != bv.cols()) {
    throw ShapeError("matmul_nt dimension mismatch: " + shape_string(av.shape()) + " x " +
                     shape_string(bv.shape()) + "^T");
  }
  const std::size_t r = av.rows(), k = av.cols(), c = bv.rows();
  Tensor out({r, c});
  gemm_nt_acc(av.data().data(), bv.data().data(), out.data().data(), r, k, c);
  return a.tape->record(std::move(out), {a, b}, [a, b, r, k, c](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    if (t.requires_grad(a.id)) {
      gemm_nn_acc(g.data().data(), t.value(b.id).data().data(), t.grad(a.id).data().data(), r,
                  c, k);
    }
    if (t.requires_grad(b.id)) {
      gemm_tn_acc(g.data().data(), t.value(a.id).data().data(), t.grad(b.id).data().data(), c,
                  r, k);
    }
  });
}

Var linear(Var x, Var w, Var bias) {
  require_same_tape(x, w);
  require_same_tape(x, bias);
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const Tensor& bv = bias.value();
  if (xv.cols() != wv.rows() || bv.size() != wv.cols()) {
    throw ShapeError("linear dimension mismatch: x " + shape_string(xv.shape()) + ", w " +
                     shape_string(wv.shape()) + ", b " + shape_string(bv.shape()));
  }
  const std::size_t r = xv.rows(), k = xv.cols(), c = wv.cols();
  Tensor out({r, c});
  for (std::size_t i = 0; i < r; ++i) std::copy_n(bv.data().data(), c, out.data().data() + i * c);
  gemm_nn_acc(xv.data().data(), wv.data().data(), out.data().data(), r, k, c);
  return x.tape->record(
      std::move(out), {x, w, bias}, [x, w, bias, r, k, c](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad(self);
        if (t.requires_grad(x.id)) {
          gemm_nt_acc(g.data().data(), t.value(w.id).data().data(), t.grad(x.id).data().data(),
                      r, c, k);
        }
        if (t.requires_grad(w.id)) {
          gemm_tn_acc(t.value(x.id).data().data(), g.data().data(), t.grad(w.id).data().data(),
                      k, r, c);
        }
        if (t.requires_grad(bias.id)) {
          Tensor& gb = t.grad(bias.id);
          for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) gb[j] += g(i, j);
        }
      });
}

Var add(Var a, Var b) {
  require_same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.shape() != bv.shape()) {
    throw ShapeError("add shape mismatch: " + shape_string(av.shape()) + " vs " +
                     shape_string(bv.shape()));
  }
  Tensor out = av;
  out.set_requires_grad(false);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    for (Var p : {a, b}) {
      if (!t.requires_grad(p.id)) continue;
      Tensor& gp = t.grad(p.id);
      for (std::size_t i = 0; i < g.size(); ++i) gp[i] += g[i];
    }
  });
}

Var add_row(Var a, Var bias) {
  require_same_tape(a, bias);
  const Tensor& av = a.value();
  const Tensor& bv = bias.value();
  if (bv.size() != av.cols()) {
    throw ShapeError("add_row mismatch: " + shape_string(av.shape()) + " + row " +
                     shape_string(bv.shape()));
  }
  const std::size_t r = av.rows(), c = av.cols();
  Tensor out({r, c});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out(i, j) = av(i, j) + bv[j];
  return a.tape->record(std::move(out), {a, bias}, [a, bias, r, c](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    if (t.requires_grad(a.id)) {
      Tensor& ga = t.grad(a.id);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (t.requires_grad(bias.id)) {
      Tensor& gb = t.grad(bias.id);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) gb[j] += g(i, j);
    }
  });
}

Var scale(Var a, double s) {
  Tensor out(a.value().shape());
  const Tensor& av = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * s;
  return a.tape->record(std::move(out), {a}, [a, s](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * s;
  });
}

namespace {

constexpr double kSqrt2OverPi = 0.79788456080286535587989211986876;
constexpr double kGeluCubic = 0.044715;

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var elementwise(Unary op, Var x) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = xv[i];
    switch (op) {
      case Unary::kTanh: out[i] = std::tanh(v); break;
      case Unary::kSigmoid: out[i] = sigmoid_scalar(v); break;
      case Unary::kRelu: out[i] = v > 0 ? v : 0.0; break;
      case Unary::kGelu: {
        const double inner = kSqrt2OverPi * (v + kGeluCubic * v * v * v);
        out[i] = 0.5 * v * (1.0 + std::tanh(inner));
        break;
      }
    }
  }
  return x.tape->record(std::move(out), {x}, [x, op](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& y = t.value(self);
    const Tensor& xv = t.value(x.id);
    Tensor& gx = t.grad(x.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      double d = 0.0;
      switch (op) {
        case Unary::kTanh: d = 1.0 - y[i] * y[i]; break;
        case Unary::kSigmoid: d = y[i] * (1.0 - y[i]); break;
        case Unary::kRelu: d = xv[i] > 0 ? 1.0 : 0.0; break;
        case Unary::kGelu: {
          const double v = xv[i];
          const double inner = kSqrt2OverPi * (v + kGeluCubic * v * v * v);
          const double th = std::tanh(inner);
          const double dinner = kSqrt2OverPi * (1.0 + 3.0 * kGeluCubic * v * v);
          d = 0.5 * (1.0 + th) + 0.5 * v * (1.0 - th * th) * dinner;
          break;
        }
      }
      gx[i] += g[i] * d;
    }
  });
}

Var softmax_rows(Var x) {
  const Tensor& xv = x.value();
  require_rank2(xv, "softmax_rows");
  const std::size_t r = xv.rows(), c = xv.cols();
  Tensor out({r, c});
  for (std::size_t i = 0; i < r; ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c; ++j) m = std::max(m, xv(i, j));
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      out(i, j) = std::exp(xv(i, j) - m);
      s += out(i, j);
    }
    const double inv = 1.0 / s;
    for (std::size_t j = 0; j < c; ++j) out(i, j) *= inv;
  }
  return x.tape->record(std::move(out), {x}, [x, r, c](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& y = t.value(self);
    Tensor& gx = t.grad(x.id);
    for (std::size_t i = 0; i < r; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += g(i, j) * y(i, j);
      for (std::size_t j = 0; j < c; ++j) gx(i, j) += y(i, j) * (g(i, j) - dot);
    }
  });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  const Tensor& xv = x.value();
  const std::size_t r = xv.rows(), c = xv.cols();
  if (gain.value().size() != c || bias.value().size() != c) {
    throw ShapeError("layer_norm parameter width mismatch for input " + shape_string(xv.shape()));
  }
  const Tensor& gv = gain.value();
  const Tensor& bv = bias.value();
  Tensor out({r, c});
  // Normalized activations and inverse std are kept for the backward pass.
  auto xhat = std::make_shared<Tensor>(Shape{r, c});
  auto inv_std = std::make_shared<std::vector<double>>(r);
  for (std::size_t i = 0; i < r; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < c; ++j) mean += xv(i, j);
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) var += (xv(i, j) - mean) * (xv(i, j) - mean);
    var /= static_cast<double>(c);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[i] = is;
    for (std::size_t j = 0; j < c; ++j) {
      const double h = (xv(i, j) - mean) * is;
      (*xhat)(i, j) = h;
      out(i, j) = h * gv[j] + bv[j];
    }
  }
  return x.tape->record(
      std::move(out), {x, gain, bias},
      [x, gain, bias, r, c, xhat, inv_std](Tape& t, std::uint32_t self) {
        const Tensor& g = t.grad(self);
        const Tensor& gv = t.value(gain.id);
        if (t.requires_grad(gain.id) || t.requires_grad(bias.id)) {
          Tensor& gg = t.grad(gain.id);
          Tensor& gb = t.grad(bias.id);
          for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) {
              gg[j] += g(i, j) * (*xhat)(i, j);
              gb[j] += g(i, j);
            }
        }
        if (!t.requires_grad(x.id)) return;
        Tensor& gx = t.grad(x.id);
        const double inv_c = 1.0 / static_cast<double>(c);
        for (std::size_t i = 0; i < r; ++i) {
          double sum_dh = 0.0, sum_dh_h = 0.0;
          for (std::size_t j = 0; j < c; ++j) {
            const double dh = g(i, j) * gv[j];
            sum_dh += dh;
            sum_dh_h += dh * (*xhat)(i, j);
          }
          for (std::size_t j = 0; j < c; ++j) {
            const double dh = g(i, j) * gv[j];
            gx(i, j) += (*inv_std)[i] * (dh - inv_c * sum_dh - (*xhat)(i, j) * inv_c * sum_dh_h);
          }
        }
      });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows of nothing");
  const std::size_t c = parts[0].cols();
  std::size_t r = 0;
  for (const Var& p : parts) {
    require_same_tape(parts[0], p);
    if (p.cols() != c) {
      throw ShapeError("concat_rows width mismatch: " + std::to_string(c) + " vs " +
                       std::to_string(p.cols()));
    }
    r += p.rows();
  }
  Tensor out({r, c});
  std::size_t at = 0;
  for (const Var& p : parts) {
    const Tensor& pv = p.value();
    std::copy(pv.data().begin(), pv.data().end(), out.data().begin() + at);
    at += pv.size();
  }
  std::vector<Var> owned(parts.begin(), parts.end());
  return parts[0].tape->record(std::move(out), parts, [owned](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    std::size_t at = 0;
    for (const Var& p : owned) {
      const std::size_t n = t.value(p.id).size();
      if (t.requires_grad(p.id) && n) {
        Tensor& gp = t.grad(p.id);
        for (std::size_t i = 0; i < n; ++i) gp[i] += g[at + i];
      }
      at += n;
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols of nothing");
  const std::size_t r = parts[0].rows();
  std::size_t c = 0;
  for (const Var& p : parts) {
    require_same_tape(parts[0], p);
    if (p.rows() != r) {
      throw ShapeError("concat_cols height mismatch: " + std::to_string(r) + " vs " +
                       std::to_string(p.rows()));
    }
    c += p.cols();
  }
  Tensor out({r, c});
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor& pv = p.value();
    for (std::size_t i = 0; i < r; ++i)
      std::copy_n(pv.data().data() + i * pv.cols(), pv.cols(), out.data().data() + i * c + off);
    off += pv.cols();
  }
  std::vector<Var> owned(parts.begin(), parts.end());
  return parts[0].tape->record(std::move(out), parts, [owned, r, c](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    std::size_t off = 0;
    for (const Var& p : owned) {
      const std::size_t pc = t.value(p.id).cols();
      if (t.requires_grad(p.id) && pc) {
        Tensor& gp = t.grad(p.id);
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < pc; ++j) gp(i, j) += g(i, off + j);
      }
      off += pc;
    }
  });
}

Var slice_rows(Var x, std::size_t begin, std::size_t end) {
  const Tensor& xv = x.value();
  if (begin > end || end > xv.rows()) {
    throw ShapeError("slice_rows [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") out of range for " + shape_string(xv.shape()));
  }
  const std::size_t c = xv.cols();
  Tensor out({end - begin, c},
             std::vector<double>(xv.data().begin() + begin * c, xv.data().begin() + end * c));
  return x.tape->record(std::move(out), {x}, [x, begin, c](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad(x.id);
    for (std::size_t i = 0; i < g.size(); ++i) gx[begin * c + i] += g[i];
  });
}

Var slice_cols(Var x, std::size_t begin, std::size_t end) {
  const Tensor& xv = x.value();
  if (begin > end || end > xv.cols()) {
    throw ShapeError("slice_cols [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") out of range for " + shape_string(xv.shape()));
  }
  const std::size_t r = xv.rows(), w = end - begin;
  Tensor out({r, w});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < w; ++j) out(i, j) = xv(i, begin + j);
  return x.tape->record(std::move(out), {x}, [x, begin, r, w](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad(x.id);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < w; ++j) gx(i, begin + j) += g(i, j);
  });
}

Var gather_rows(Var x, std::span<const std::size_t> idx) {
  const Tensor& xv = x.value();
  const std::size_t c = xv.cols();
  Tensor out({idx.size(), c});
  for (std::size_t t = 0; t < idx.size(); ++t) {
    if (idx[t] >= xv.rows()) {
      throw ShapeError("gather_rows index " + std::to_string(idx[t]) + " out of range for " +
                       shape_string(xv.shape()));
    }
    std::copy_n(xv.data().data() + idx[t] * c, c, out.data().data() + t * c);
  }
  std::vector<std::size_t> owned(idx.begin(), idx.end());
  return x.tape->record(std::move(out), {x}, [x, owned, c](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad(x.id);
    for (std::size_t r = 0; r < owned.size(); ++r)
      for (std::size_t j = 0; j < c; ++j) gx(owned[r], j) += g(r, j);
  });
}

Var mean_rows(Var x) {
  const Tensor& xv = x.value();
  const std::size_t r = xv.rows(), c = xv.cols();
  if (r == 0) throw NumericError("mean over zero rows");
  Tensor out({1, c});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j] += xv(i, j);
  const double inv = 1.0 / static_cast<double>(r);
  for (std::size_t j = 0; j < c; ++j) out[j] *= inv;
  return x.tape->record(std::move(out), {x}, [x, r, c, inv](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad(x.id);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) gx(i, j) += g[j] * inv;
  });
}

Var max_rows(Var x) {
  const Tensor& xv = x.value();
  const std::size_t r = xv.rows(), c = xv.cols();
  if (r == 0) throw NumericError("max over zero rows");
  Tensor out({1, c});
  std::vector<std::size_t> arg(c, 0);
  for (std::size_t j = 0; j < c; ++j) {
    out[j] = xv(0, j);
    for (std::size_t i = 1; i < r; ++i) {
      if (xv(i, j) > out[j]) {
        out[j] = xv(i, j);
        arg[j] = i;
      }
    }
  }
  return x.tape->record(std::move(out), {x}, [x, arg, c](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad(x.id);
    for (std::size_t j = 0; j < c; ++j) gx(arg[j], j) += g[j];
  });
}

Var sum(Var x) {
  const Tensor& xv = x.value();
  double s = 0.0;
  for (double v : xv.data()) s += v;
  return x.tape->record(Tensor::scalar(s), {x}, [x](Tape& t, std::uint32_t self) {
    const double g = t.grad(self)[0];
    Tensor& gx = t.grad(x.id);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
  });
}

Var dropout(Var x, double rate, Rng& rng) {
  if (rate <= 0.0) return x;
  if (rate >= 1.0) throw NumericError("dropout rate must be < 1");
  const Tensor& xv = x.value();
  const double keep_scale = 1.0 / (1.0 - rate);
  auto mask = std::make_shared<std::vector<double>>(xv.size());
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    (*mask)[i] = rng.bernoulli(rate) ? 0.0 : keep_scale;
    out[i] = xv[i] * (*mask)[i];
  }
  return x.tape->record(std::move(out), {x}, [x, mask](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad(x.id);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (*mask)[i];
  });
}

}  // namespace fsmr::ops
