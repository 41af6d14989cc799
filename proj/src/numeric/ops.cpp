/*
 * Copyright 2026 The DenseLoRA Desk Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "denselora/numeric/ops.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <vector>

#include "denselora/kernels/kernels.hpp"
#include "denselora/numeric/errors.hpp"

namespace denselora {

namespace {

std::atomic<double> g_derivative_fault{0.0};

void require_matrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw DimensionError(std::string(op) + ": expected a matrix, got " + shape_string(t.shape()));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

// c = a·b for raw row-major blocks.
Tensor gemm(const Tensor& a, std::size_t m, std::size_t n, const Tensor& b, std::size_t p, Shape out_shape) {
  Tensor c(std::move(out_shape));
  kernels::active().gemm_acc(m, n, p, a.data().data(), b.data().data(), c.data().data());
  return c;
}

void accumulate(Tensor& dst, const Tensor& src) {
  kernels::active().axpy(dst.size(), 1.0, src.data().data(), dst.data().data());
}

double fault_factor() { return 1.0 + g_derivative_fault.load(std::memory_order_relaxed); }

}  // namespace

namespace testing {
void set_derivative_fault(double relative_error) { g_derivative_fault.store(relative_error); }
double derivative_fault() { return g_derivative_fault.load(); }
}  // namespace testing

std::string_view to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Identity:
      return "identity";
    case ActivationKind::Tanh:
      return "tanh";
    case ActivationKind::Relu:
      return "relu";
  }
  return "unknown";
}

std::optional<ActivationKind> parse_activation(std::string_view name) {
  if (name == "identity") return ActivationKind::Identity;
  if (name == "tanh") return ActivationKind::Tanh;
  if (name == "relu") return ActivationKind::Relu;
  return std::nullopt;
}

namespace {

double apply_activation(double x, ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Identity:
      return x;
    case ActivationKind::Tanh:
      return std::tanh(x);
    case ActivationKind::Relu:
      return x > 0.0 ? x : 0.0;
  }
  return x;
}

}  // namespace

double activation_derivative(double x, ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Identity:
      return 1.0;
    case ActivationKind::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ActivationKind::Relu:
      return x > 0.0 ? 1.0 : 0.0;  // kink at 0 takes the left derivative
  }
  return 1.0;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  if (b.rank() == 1) {
    if (a.cols() != b.size()) {
      throw DimensionError("matmul: inner dimensions differ, " + shape_string(a.shape()) + " x " +
                           shape_string(b.shape()));
    }
    return gemm(a, a.rows(), a.cols(), b, 1, {a.rows()});
  }
  require_matrix(b, "matmul");
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  }
  return gemm(a, a.rows(), a.cols(), b, b.cols(), {a.rows(), b.cols()});
}

Tensor activation(const Tensor& x, ActivationKind kind) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = apply_activation(x[i], kind);
  return y;
}

Var matmul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_matrix(av, "matmul");
  require_matrix(bv, "matmul");
  const std::size_t m = av.rows(), n = av.cols(), p = bv.cols();
  if (bv.rows() != n) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_string(av.shape()) + " x " +
                         shape_string(bv.shape()));
  }
  Tensor out = gemm(av, m, n, bv, p, {m, p});
  return a.tape().record(std::move(out), {a, b}, [a, b, m, n, p](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad(self);
    const auto& k = kernels::active();
    if (a.requires_grad()) {
      const Tensor bt = b.value().transposed();
      k.gemm_acc(m, p, n, g.data().data(), bt.data().data(), tape.grad(a.index()).data().data());
    }
    if (b.requires_grad()) {
      const Tensor at = a.value().transposed();
      k.gemm_acc(n, m, p, at.data().data(), g.data().data(), tape.grad(b.index()).data().data());
    }
  });
}

Var transpose(Var a) {
  require_matrix(a.value(), "transpose");
  return a.tape().record(a.value().transposed(), {a}, [a](Tape& tape, std::size_t self) {
    accumulate(tape.grad(a.index()), tape.grad(self).transposed());
  });
}

Var linear(Var x, Var weight) {
  const Tensor& xv = x.value();
  const Tensor& wv = weight.value();
  require_matrix(xv, "linear");
  require_matrix(wv, "linear");
  const std::size_t n = xv.rows(), in = xv.cols(), out_features = wv.rows();
  if (wv.cols() != in) {
    throw DimensionError("linear: input " + shape_string(xv.shape()) + " does not fit weight " +
                         shape_string(wv.shape()));
  }
  const Tensor wt = wv.transposed();
  Tensor out = gemm(xv, n, in, wt, out_features, {n, out_features});
  return x.tape().record(std::move(out), {x, weight}, [x, weight, n, in, out_features](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad(self);
    const auto& k = kernels::active();
    if (x.requires_grad()) {
      k.gemm_acc(n, out_features, in, g.data().data(), weight.value().data().data(),
                 tape.grad(x.index()).data().data());
    }
    if (weight.requires_grad()) {
      const Tensor gt = g.transposed();
      k.gemm_acc(out_features, n, in, gt.data().data(), x.value().data().data(),
                 tape.grad(weight.index()).data().data());
    }
  });
}

Var add(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor out(a.shape());
  kernels::active().add(out.size(), a.value().data().data(), b.value().data().data(), out.data().data());
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad(self);
    if (a.requires_grad()) accumulate(tape.grad(a.index()), g);
    if (b.requires_grad()) accumulate(tape.grad(b.index()), g);
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] - b.value()[i];
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad(self);
    if (a.requires_grad()) accumulate(tape.grad(a.index()), g);
    if (b.requires_grad()) kernels::active().axpy(g.size(), -1.0, g.data().data(), tape.grad(b.index()).data().data());
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out(a.shape());
  kernels::active().mul(out.size(), a.value().data().data(), b.value().data().data(), out.data().data());
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad(self);
    const auto& k = kernels::active();
    if (a.requires_grad()) k.mul_acc(g.size(), g.data().data(), b.value().data().data(), tape.grad(a.index()).data().data());
    if (b.requires_grad()) k.mul_acc(g.size(), g.data().data(), a.value().data().data(), tape.grad(b.index()).data().data());
  });
}

Var scale(Var a, double factor) {
  Tensor out(a.shape());
  kernels::active().scale(out.size(), factor, a.value().data().data(), out.data().data());
  return a.tape().record(std::move(out), {a}, [a, factor](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad(self);
    kernels::active().axpy(g.size(), factor, g.data().data(), tape.grad(a.index()).data().data());
  });
}

Var add_rowwise(Var x, Var row) {
  const Tensor& xv = x.value();
  const Tensor& rv = row.value();
  require_matrix(xv, "add_rowwise");
  const std::size_t n = xv.rows(), m = xv.cols();
  if (rv.rank() != 1 || rv.size() != m) {
    throw DimensionError("add_rowwise: row " + shape_string(rv.shape()) + " does not fit " + shape_string(xv.shape()));
  }
  const auto& k = kernels::active();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < n; ++i) k.add(m, xv.data().data() + i * m, rv.data().data(), out.data().data() + i * m);
  return x.tape().record(std::move(out), {x, row}, [x, row, n, m](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad(self);
    const auto& k = kernels::active();
    if (x.requires_grad()) accumulate(tape.grad(x.index()), g);
    if (row.requires_grad()) {
      Tensor& gr = tape.grad(row.index());
      for (std::size_t i = 0; i < n; ++i) k.axpy(m, 1.0, g.data().data() + i * m, gr.data().data());
    }
  });
}

Var mul_rowwise(Var x, Var row) {
  const Tensor& xv = x.value();
  const Tensor& rv = row.value();
  require_matrix(xv, "mul_rowwise");
  const std::size_t n = xv.rows(), m = xv.cols();
  if (rv.rank() != 1 || rv.size() != m) {
    throw DimensionError("mul_rowwise: row " + shape_string(rv.shape()) + " does not fit " + shape_string(xv.shape()));
  }
  const auto& k = kernels::active();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < n; ++i) k.mul(m, xv.data().data() + i * m, rv.data().data(), out.data().data() + i * m);
  return x.tape().record(std::move(out), {x, row}, [x, row, n, m](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad(self);
    const auto& k = kernels::active();
    if (x.requires_grad()) {
      Tensor& gx = tape.grad(x.index());
      for (std::size_t i = 0; i < n; ++i)
        k.mul_acc(m, g.data().data() + i * m, row.value().data().data(), gx.data().data() + i * m);
    }
    if (row.requires_grad()) {
      Tensor& gr = tape.grad(row.index());
      for (std::size_t i = 0; i < n; ++i)
        k.mul_acc(m, g.data().data() + i * m, x.value().data().data() + i * m, gr.data().data());
    }
  });
}

Var activation(Var x, ActivationKind kind) {
  if (kind == ActivationKind::Identity && testing::derivative_fault() == 0.0) return x;
  Tensor out = activation(x.value(), kind);
  return x.tape().record(std::move(out), {x}, [x, kind](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad(self);
    Tensor& gx = tape.grad(x.index());
    const Tensor& xv = x.value();
    const double fault = fault_factor();
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * activation_derivative(xv[i], kind) * fault;
  });
}

Var silu(Var x) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] / (1.0 + std::exp(-xv[i]));
  return x.tape().record(std::move(out), {x}, [x](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad(self);
    Tensor& gx = tape.grad(x.index());
    const Tensor& xv = x.value();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double s = 1.0 / (1.0 + std::exp(-xv[i]));
      gx[i] += g[i] * (s + xv[i] * s * (1.0 - s));
    }
  });
}

Var rms_norm(Var x, double eps) {
  const Tensor& xv = x.value();
  require_matrix(xv, "rms_norm");
  const std::size_t n = xv.rows(), m = xv.cols();
  Tensor out(xv.shape());
  std::vector<double> inv_rms(n);
  for (std::size_t i = 0; i < n; ++i) {
    double ss = 0.0;
    for (std::size_t j = 0; j < m; ++j) ss += xv(i, j) * xv(i, j);
    inv_rms[i] = 1.0 / std::sqrt(ss / static_cast<double>(m) + eps);
    for (std::size_t j = 0; j < m; ++j) out(i, j) = xv(i, j) * inv_rms[i];
  }
  return x.tape().record(std::move(out), {x}, [x, n, m, inv_rms = std::move(inv_rms)](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad(self);
    const Tensor& y = tape.value(self);
    Tensor& gx = tape.grad(x.index());
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < m; ++j) dot += g(i, j) * y(i, j);
      dot /= static_cast<double>(m);
      for (std::size_t j = 0; j < m; ++j) gx(i, j) += (g(i, j) - y(i, j) * dot) * inv_rms[i];
    }
  });
}

Var causal_attention(Var q, Var k, Var v, std::size_t n_heads, std::size_t seq_len) {
  const Tensor& qv = q.value();
  require_matrix(qv, "causal_attention");
  require_same_shape(qv, k.value(), "causal_attention");
  require_same_shape(qv, v.value(), "causal_attention");
  const std::size_t rows = qv.rows(), width = qv.cols();
  if (n_heads == 0 || width % n_heads != 0) throw DimensionError("causal_attention: width not divisible by heads");
  if (seq_len == 0 || rows % seq_len != 0) throw DimensionError("causal_attention: rows not a multiple of seq_len");
  const std::size_t batch = rows / seq_len, hd = width / n_heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(hd));
  const Tensor& kv = k.value();
  const Tensor& vv = v.value();

  // probs[((b * H + h) * T + t) * T + s], zero above the diagonal
  std::vector<double> probs(batch * n_heads * seq_len * seq_len, 0.0);
  Tensor out(qv.shape());
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t h = 0; h < n_heads; ++h) {
      const std::size_t col = h * hd;
      for (std::size_t t = 0; t < seq_len; ++t) {
        double* p = probs.data() + ((b * n_heads + h) * seq_len + t) * seq_len;
        const std::size_t qr = b * seq_len + t;
        double max_score = -INFINITY;
        for (std::size_t s = 0; s <= t; ++s) {
          const std::size_t kr = b * seq_len + s;
          double score = 0.0;
          for (std::size_t c = 0; c < hd; ++c) score += qv(qr, col + c) * kv(kr, col + c);
          p[s] = score * inv_sqrt;
          max_score = std::max(max_score, p[s]);
        }
        double total = 0.0;
        for (std::size_t s = 0; s <= t; ++s) {
          p[s] = std::exp(p[s] - max_score);
          total += p[s];
        }
        for (std::size_t s = 0; s <= t; ++s) {
          p[s] /= total;
          const std::size_t vr = b * seq_len + s;
          for (std::size_t c = 0; c < hd; ++c) out(qr, col + c) += p[s] * vv(vr, col + c);
        }
      }
    }
  }

  return q.tape().record(
      std::move(out), {q, k, v},
      [q, k, v, n_heads, seq_len, batch, hd, inv_sqrt, probs = std::move(probs)](Tape& tape, std::size_t self) {
        const Tensor& g = tape.grad(self);
        const Tensor& qv = q.value();
        const Tensor& kv = k.value();
        const Tensor& vv = v.value();
        Tensor* gq = q.requires_grad() ? &tape.grad(q.index()) : nullptr;
        Tensor* gk = k.requires_grad() ? &tape.grad(k.index()) : nullptr;
        Tensor* gv = v.requires_grad() ? &tape.grad(v.index()) : nullptr;
        std::vector<double> dscore(seq_len);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t h = 0; h < n_heads; ++h) {
            const std::size_t col = h * hd;
            for (std::size_t t = 0; t < seq_len; ++t) {
              const double* p = probs.data() + ((b * n_heads + h) * seq_len + t) * seq_len;
              const std::size_t qr = b * seq_len + t;
              double weighted = 0.0;
              for (std::size_t s = 0; s <= t; ++s) {
                const std::size_t vr = b * seq_len + s;
                double dp = 0.0;
                for (std::size_t c = 0; c < hd; ++c) dp += g(qr, col + c) * vv(vr, col + c);
                dscore[s] = dp;
                weighted += p[s] * dp;
                if (gv)
                  for (std::size_t c = 0; c < hd; ++c) (*gv)(vr, col + c) += p[s] * g(qr, col + c);
              }
              for (std::size_t s = 0; s <= t; ++s) {
                const double ds = p[s] * (dscore[s] - weighted) * inv_sqrt;
                const std::size_t kr = b * seq_len + s;
                if (gq)
                  for (std::size_t c = 0; c < hd; ++c) (*gq)(qr, col + c) += ds * kv(kr, col + c);
                if (gk)
                  for (std::size_t c = 0; c < hd; ++c) (*gk)(kr, col + c) += ds * qv(qr, col + c);
              }
            }
          }
        }
      });
}

Var embedding(Var table, std::span<const int> ids) {
  const Tensor& tv = table.value();
  require_matrix(tv, "embedding");
  const std::size_t vocab = tv.rows(), width = tv.cols();
  Tensor out({ids.size(), width});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
      throw InputError("embedding: id " + std::to_string(ids[i]) + " outside [0, " + std::to_string(vocab) + ")");
    }
    std::copy_n(tv.data().data() + ids[i] * width, width, out.data().data() + i * width);
  }
  std::vector<int> idx(ids.begin(), ids.end());
  return table.tape().record(std::move(out), {table}, [table, width, idx = std::move(idx)](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad(self);
    Tensor& gt = tape.grad(table.index());
    for (std::size_t i = 0; i < idx.size(); ++i)
      kernels::active().axpy(width, 1.0, g.data().data() + i * width, gt.data().data() + idx[i] * width);
  });
}

Var cross_entropy(Var logits, std::span<const int> targets) {
  const Tensor& lv = logits.value();
  require_matrix(lv, "cross_entropy");
  const std::size_t n = lv.rows(), vocab = lv.cols();
  if (targets.size() != n) throw DimensionError("cross_entropy: one target per row required");
  Tensor probs(lv.shape());
  double loss = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (targets[i] < 0) continue;
    if (static_cast<std::size_t>(targets[i]) >= vocab) {
      throw InputError("cross_entropy: target " + std::to_string(targets[i]) + " outside vocabulary");
    }
    double max_logit = -INFINITY;
    for (std::size_t j = 0; j < vocab; ++j) max_logit = std::max(max_logit, lv(i, j));
    double total = 0.0;
    for (std::size_t j = 0; j < vocab; ++j) {
      probs(i, j) = std::exp(lv(i, j) - max_logit);
      total += probs(i, j);
    }
    for (std::size_t j = 0; j < vocab; ++j) probs(i, j) /= total;
    loss += std::log(total) + max_logit - lv(i, targets[i]);
    ++counted;
  }
  if (counted == 0) throw InputError("cross_entropy: no target positions");
  const double inv = 1.0 / static_cast<double>(counted);
  std::vector<int> tgt(targets.begin(), targets.end());
  return logits.tape().record(
      Tensor::scalar(loss * inv), {logits},
      [logits, n, vocab, inv, probs = std::move(probs), tgt = std::move(tgt)](Tape& tape, std::size_t self) {
        const double g = tape.grad(self).item() * inv;
        Tensor& gl = tape.grad(logits.index());
        for (std::size_t i = 0; i < n; ++i) {
          if (tgt[i] < 0) continue;
          for (std::size_t j = 0; j < vocab; ++j) gl(i, j) += g * probs(i, j);
          gl(i, tgt[i]) -= g;
        }
      });
}

Var sum(Var x) {
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  return x.tape().record(Tensor::scalar(total), {x}, [x](Tape& tape, std::size_t self) {
    const double g = tape.grad(self).item();
    Tensor& gx = tape.grad(x.index());
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
  });
}

Var mean(Var x) {
  const std::size_t count = x.value().size();
  if (count == 0) throw DimensionError("mean of empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(count));
}

Var dropout(Var x, double p, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("dropout probability must lie in [0, 1)");
  if (p == 0.0) return x;
  const Tensor& xv = x.value();
  const double keep_scale = 1.0 / (1.0 - p);
  Tensor mask(xv.shape());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = rng.bernoulli(p) ? 0.0 : keep_scale;
  Tensor out(xv.shape());
  kernels::active().mul(out.size(), xv.data().data(), mask.data().data(), out.data().data());
  return x.tape().record(std::move(out), {x}, [x, mask = std::move(mask)](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad(self);
    kernels::active().mul_acc(g.size(), g.data().data(), mask.data().data(), tape.grad(x.index()).data().data());
  });
}

}  // namespace denselora
