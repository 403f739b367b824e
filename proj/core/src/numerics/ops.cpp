// Copyright 2026 The SkimNet Authors
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

#include "skimnet/numerics/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "skimnet/error.hpp"
#include "skimnet/numerics/cost.hpp"

namespace skimnet::numerics {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;
using CMapRow = Eigen::Map<const Eigen::RowVectorXd>;

CMapMat mat(const Tensor& t) {
  return CMapMat(t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}

MapMat mat(Tensor& t) {
  return MapMat(t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}

CMapMat block_rows(const Tensor& t, std::size_t first, std::size_t count) {
  return CMapMat(t.data() + first * t.cols(), static_cast<Eigen::Index>(count),
                 static_cast<Eigen::Index>(t.cols()));
}

MapMat block_rows(Tensor& t, std::size_t first, std::size_t count) {
  return MapMat(t.data() + first * t.cols(), static_cast<Eigen::Index>(count),
                static_cast<Eigen::Index>(t.cols()));
}

void require_same_shape(const char* op, const Var& a, const Var& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": operand shapes " + shape_string(a.shape()) + " and " +
                         shape_string(b.shape()) + " differ");
  }
}

Graph& graph_of(const char* op, const Var& v) {
  if (!v.valid()) throw ValidationError(std::string(op) + ": uninitialized variable");
  return v.graph();
}

void accumulate(Graph& g, std::size_t id, const Tensor& delta, double factor = 1.0) {
  Tensor& acc = g.grad_accumulator(id);
  double* dst = acc.data();
  for (std::size_t i = 0; i < delta.size(); ++i) dst[i] += factor * delta[i];
}

template <typename Fwd, typename Deriv>
Var unary(const char* op, Var x, Fwd fwd, Deriv deriv) {
  const Tensor& xv = x.value();
  Tensor y(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) y[i] = fwd(xv[i]);
  const std::size_t xi = x.id();
  return graph_of(op, x).emit(op, std::move(y), {x}, [xi, deriv](Graph& g, std::size_t self) {
    const Tensor& dy = g.grad(self);
    const Tensor& xv = g.value(xi);
    const Tensor& yv = g.value(self);
    Tensor& dx = g.grad_accumulator(xi);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * deriv(xv[i], yv[i]);
  });
}

}  // namespace

Var affine_apply(Var x, Var weight, Var bias) {
  const Tensor& X = x.value();
  const Tensor& W = weight.value();
  const Tensor& B = bias.value();
  if (W.rank() != 2) {
    throw DimensionError("affine_apply: weight W must be a matrix, got " + shape_string(W.shape()));
  }
  const std::size_t m = W.rows();
  const std::size_t n = W.cols();
  const std::size_t r = X.rows();
  if (X.cols() != n) {
    throw DimensionError("affine_apply: input x " + shape_string(X.shape()) +
                         " does not conform to weight W " + shape_string(W.shape()));
  }
  if (B.size() != m) {
    throw DimensionError("affine_apply: bias b " + shape_string(B.shape()) +
                         " does not conform to weight W " + shape_string(W.shape()));
  }
  Tensor Y(X.rank() == 1 ? Shape{m} : Shape{r, m});
  auto y = mat(Y);
  y.noalias() = mat(X) * mat(W).transpose();
  y.rowwise() += CMapRow(B.data(), static_cast<Eigen::Index>(m));
  charge(static_cast<std::uint64_t>(r) * m * n, static_cast<std::uint64_t>(r) * m);

  const std::size_t xi = x.id(), wi = weight.id(), bi = bias.id();
  return graph_of("affine_apply", x)
      .emit("affine_apply", std::move(Y), {x, weight, bias}, [xi, wi, bi](Graph& g, std::size_t self) {
        const Tensor& dY = g.grad(self);
        if (g.requires_grad(xi)) mat(g.grad_accumulator(xi)).noalias() += mat(dY) * mat(g.value(wi));
        if (g.requires_grad(wi)) {
          mat(g.grad_accumulator(wi)).noalias() += mat(dY).transpose() * mat(g.value(xi));
        }
        if (g.requires_grad(bi)) {
          Tensor& db = g.grad_accumulator(bi);
          const std::size_t rows = dY.rows(), cols = dY.cols();
          for (std::size_t row = 0; row < rows; ++row) {
            for (std::size_t c = 0; c < cols; ++c) db[c] += dY[row * cols + c];
          }
        }
      });
}

Var linear_apply(Var x, Var weight) {
  const Tensor& X = x.value();
  const Tensor& W = weight.value();
  if (W.rank() != 2) {
    throw DimensionError("linear_apply: weight W must be a matrix, got " + shape_string(W.shape()));
  }
  const std::size_t m = W.rows();
  const std::size_t n = W.cols();
  const std::size_t r = X.rows();
  if (X.cols() != n) {
    throw DimensionError("linear_apply: input x " + shape_string(X.shape()) + " does not conform to weight W " +
                         shape_string(W.shape()));
  }
  Tensor Y(X.rank() == 1 ? Shape{m} : Shape{r, m});
  mat(Y).noalias() = mat(X) * mat(W).transpose();
  charge(static_cast<std::uint64_t>(r) * m * n);

  const std::size_t xi = x.id(), wi = weight.id();
  return graph_of("linear_apply", x).emit("linear_apply", std::move(Y), {x, weight}, [xi, wi](Graph& g, std::size_t self) {
    const Tensor& dY = g.grad(self);
    if (g.requires_grad(xi)) mat(g.grad_accumulator(xi)).noalias() += mat(dY) * mat(g.value(wi));
    if (g.requires_grad(wi)) mat(g.grad_accumulator(wi)).noalias() += mat(dY).transpose() * mat(g.value(xi));
  });
}

Var add(Var a, Var b) {
  require_same_shape("add", a, b);
  Tensor y(a.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.value()[i] + b.value()[i];
  const std::size_t ai = a.id(), bi = b.id();
  return graph_of("add", a).emit("add", std::move(y), {a, b}, [ai, bi](Graph& g, std::size_t self) {
    if (g.requires_grad(ai)) accumulate(g, ai, g.grad(self));
    if (g.requires_grad(bi)) accumulate(g, bi, g.grad(self));
  });
}

Var sub(Var a, Var b) {
  require_same_shape("sub", a, b);
  Tensor y(a.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.value()[i] - b.value()[i];
  const std::size_t ai = a.id(), bi = b.id();
  return graph_of("sub", a).emit("sub", std::move(y), {a, b}, [ai, bi](Graph& g, std::size_t self) {
    if (g.requires_grad(ai)) accumulate(g, ai, g.grad(self));
    if (g.requires_grad(bi)) accumulate(g, bi, g.grad(self), -1.0);
  });
}

Var mul(Var a, Var b) {
  require_same_shape("mul", a, b);
  Tensor y(a.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.value()[i] * b.value()[i];
  const std::size_t ai = a.id(), bi = b.id();
  return graph_of("mul", a).emit("mul", std::move(y), {a, b}, [ai, bi](Graph& g, std::size_t self) {
    const Tensor& dy = g.grad(self);
    if (g.requires_grad(ai)) {
      Tensor& da = g.grad_accumulator(ai);
      const Tensor& bv = g.value(bi);
      for (std::size_t i = 0; i < dy.size(); ++i) da[i] += dy[i] * bv[i];
    }
    if (g.requires_grad(bi)) {
      Tensor& db = g.grad_accumulator(bi);
      const Tensor& av = g.value(ai);
      for (std::size_t i = 0; i < dy.size(); ++i) db[i] += dy[i] * av[i];
    }
  });
}

Var scale(Var a, double factor) {
  Tensor y(a.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = factor * a.value()[i];
  const std::size_t ai = a.id();
  return graph_of("scale", a).emit("scale", std::move(y), {a}, [ai, factor](Graph& g, std::size_t self) {
    accumulate(g, ai, g.grad(self), factor);
  });
}

Var relu(Var x) {
  return unary(
      "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double xv, double) { return xv > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(Var x) {
  return unary(
      "sigmoid", x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [](double, double yv) { return yv * (1.0 - yv); });
}

Var tanh(Var x) {
  return unary(
      "tanh", x, [](double v) { return std::tanh(v); }, [](double, double yv) { return 1.0 - yv * yv; });
}

Var concat_cols(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rows() != bv.rows() || av.rank() != bv.rank()) {
    throw DimensionError("concat_cols: operands " + shape_string(av.shape()) + " and " +
                         shape_string(bv.shape()) + " have different row counts");
  }
  const std::size_t r = av.rows(), ca = av.cols(), cb = bv.cols();
  Tensor y(av.rank() == 1 ? Shape{ca + cb} : Shape{r, ca + cb});
  for (std::size_t row = 0; row < r; ++row) {
    std::copy_n(av.data() + row * ca, ca, y.data() + row * (ca + cb));
    std::copy_n(bv.data() + row * cb, cb, y.data() + row * (ca + cb) + ca);
  }
  const std::size_t ai = a.id(), bi = b.id();
  return graph_of("concat_cols", a)
      .emit("concat_cols", std::move(y), {a, b}, [ai, bi, r, ca, cb](Graph& g, std::size_t self) {
        const Tensor& dy = g.grad(self);
        if (g.requires_grad(ai)) {
          Tensor& da = g.grad_accumulator(ai);
          for (std::size_t row = 0; row < r; ++row)
            for (std::size_t c = 0; c < ca; ++c) da[row * ca + c] += dy[row * (ca + cb) + c];
        }
        if (g.requires_grad(bi)) {
          Tensor& db = g.grad_accumulator(bi);
          for (std::size_t row = 0; row < r; ++row)
            for (std::size_t c = 0; c < cb; ++c) db[row * cb + c] += dy[row * (ca + cb) + ca + c];
        }
      });
}

Var slice_cols(Var x, std::size_t begin, std::size_t end) {
  const Tensor& xv = x.value();
  const std::size_t r = xv.rows(), c = xv.cols();
  if (begin >= end || end > c) {
    throw DimensionError("slice_cols: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") invalid for " + shape_string(xv.shape()));
  }
  const std::size_t w = end - begin;
  Tensor y(xv.rank() == 1 ? Shape{w} : Shape{r, w});
  for (std::size_t row = 0; row < r; ++row) std::copy_n(xv.data() + row * c + begin, w, y.data() + row * w);
  const std::size_t xi = x.id();
  return graph_of("slice_cols", x)
      .emit("slice_cols", std::move(y), {x}, [xi, r, c, w, begin](Graph& g, std::size_t self) {
        const Tensor& dy = g.grad(self);
        Tensor& dx = g.grad_accumulator(xi);
        for (std::size_t row = 0; row < r; ++row)
          for (std::size_t k = 0; k < w; ++k) dx[row * c + begin + k] += dy[row * w + k];
      });
}

Var softmax_rows(Var x) {
  const Tensor& xv = x.value();
  if (xv.size() == 0 || xv.cols() == 0) throw DimensionError("softmax: empty input");
  const std::size_t r = xv.rows(), c = xv.cols();
  Tensor y(xv.shape());
  for (std::size_t row = 0; row < r; ++row) {
    const double* in = xv.data() + row * c;
    double* out = y.data() + row * c;
    const double mx = *std::max_element(in, in + c);
    double total = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      out[k] = std::exp(in[k] - mx);
      total += out[k];
    }
    for (std::size_t k = 0; k < c; ++k) out[k] /= total;
  }
  const std::size_t xi = x.id();
  return graph_of("softmax", x).emit("softmax", std::move(y), {x}, [xi, r, c](Graph& g, std::size_t self) {
    const Tensor& dy = g.grad(self);
    const Tensor& yv = g.value(self);
    Tensor& dx = g.grad_accumulator(xi);
    for (std::size_t row = 0; row < r; ++row) {
      double dot = 0.0;
      for (std::size_t k = 0; k < c; ++k) dot += dy[row * c + k] * yv[row * c + k];
      for (std::size_t k = 0; k < c; ++k) dx[row * c + k] += yv[row * c + k] * (dy[row * c + k] - dot);
    }
  });
}

Var soft_target_cross_entropy(Var probs, const Tensor& targets, double floor) {
  const Tensor& p = probs.value();
  if (p.shape() != targets.shape() && !(p.rows() == targets.rows() && p.cols() == targets.cols())) {
    throw DimensionError("soft_target_cross_entropy: probs " + shape_string(p.shape()) + " vs targets " +
                         shape_string(targets.shape()));
  }
  const std::size_t r = p.rows();
  double loss = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (targets[i] != 0.0) loss -= targets[i] * std::log(std::max(p[i], floor));
  }
  loss /= static_cast<double>(r);
  const std::size_t pi = probs.id();
  return graph_of("soft_target_cross_entropy", probs)
      .emit("soft_target_cross_entropy", Tensor({1}, {loss}), {probs},
            [pi, targets, floor, r](Graph& g, std::size_t self) {
              const double up = g.grad(self)[0] / static_cast<double>(r);
              const Tensor& pv = g.value(pi);
              Tensor& dp = g.grad_accumulator(pi);
              for (std::size_t i = 0; i < pv.size(); ++i) {
                if (targets[i] != 0.0 && pv[i] > floor) dp[i] -= up * targets[i] / pv[i];
              }
            });
}

Var l1_rows(Var a, Var b) {
  require_same_shape("l1_rows", a, b);
  const std::size_t r = a.value().rows();
  double loss = 0.0;
  for (std::size_t i = 0; i < a.value().size(); ++i) loss += std::abs(a.value()[i] - b.value()[i]);
  loss /= static_cast<double>(r);
  const std::size_t ai = a.id(), bi = b.id();
  return graph_of("l1_rows", a)
      .emit("l1_rows", Tensor({1}, {loss}), {a, b}, [ai, bi, r](Graph& g, std::size_t self) {
        const double up = g.grad(self)[0] / static_cast<double>(r);
        const Tensor& av = g.value(ai);
        const Tensor& bv = g.value(bi);
        for (std::size_t i = 0; i < av.size(); ++i) {
          const double d = av[i] - bv[i];
          const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
          if (g.requires_grad(ai)) g.grad_accumulator(ai)[i] += up * s;
          if (g.requires_grad(bi)) g.grad_accumulator(bi)[i] -= up * s;
        }
      });
}

Var sum_all(Var x) {
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  const std::size_t xi = x.id();
  return graph_of("sum_all", x).emit("sum_all", Tensor({1}, {total}), {x}, [xi](Graph& g, std::size_t self) {
    const double up = g.grad(self)[0];
    Tensor& dx = g.grad_accumulator(xi);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += up;
  });
}

Var attention_scores(Var keys, Var queries, std::size_t n, double scale_factor) {
  const Tensor& K = keys.value();
  const Tensor& Q = queries.value();
  const std::size_t batch = Q.rows(), d = Q.cols();
  if (K.cols() != d) {
    throw DimensionError("attention_weights: key dimension " + std::to_string(K.cols()) +
                         " does not match query dimension " + std::to_string(d));
  }
  if (n == 0 || K.rows() != batch * n) {
    throw DimensionError("attention_weights: " + std::to_string(K.rows()) + " key rows for " +
                         std::to_string(batch) + " queries over " + std::to_string(n) + " positions");
  }
  Tensor S({batch, n});
  for (std::size_t b = 0; b < batch; ++b) {
    auto row = block_rows(S, b, 1);
    row.noalias() = scale_factor * (block_rows(Q, b, 1) * block_rows(K, b * n, n).transpose());
  }
  charge(static_cast<std::uint64_t>(batch) * n * d);
  const std::size_t ki = keys.id(), qi = queries.id();
  return graph_of("attention_scores", keys)
      .emit("attention_scores", std::move(S), {keys, queries},
            [ki, qi, n, batch, scale_factor](Graph& g, std::size_t self) {
              const Tensor& dS = g.grad(self);
              for (std::size_t b = 0; b < batch; ++b) {
                if (g.requires_grad(ki)) {
                  block_rows(g.grad_accumulator(ki), b * n, n).noalias() +=
                      scale_factor * (block_rows(dS, b, 1).transpose() * block_rows(g.value(qi), b, 1));
                }
                if (g.requires_grad(qi)) {
                  block_rows(g.grad_accumulator(qi), b, 1).noalias() +=
                      scale_factor * (block_rows(dS, b, 1) * block_rows(g.value(ki), b * n, n));
                }
              }
            });
}

Var soft_index(Var weights, Var feats) {
  const Tensor& W = weights.value();
  const Tensor& F = feats.value();
  const std::size_t batch = W.rows(), n = W.cols(), f = F.cols();
  if (F.rows() != batch * n) {
    throw DimensionError("soft_index: " + std::to_string(F.rows()) + " feature rows for weights " +
                         shape_string(W.shape()));
  }
  Tensor out({batch, f});
  for (std::size_t b = 0; b < batch; ++b) {
    block_rows(out, b, 1).noalias() = block_rows(W, b, 1) * block_rows(F, b * n, n);
  }
  charge(static_cast<std::uint64_t>(batch) * n * f);
  const std::size_t wi = weights.id(), fi = feats.id();
  return graph_of("soft_index", weights)
      .emit("soft_index", std::move(out), {weights, feats}, [wi, fi, batch, n](Graph& g, std::size_t self) {
        const Tensor& dout = g.grad(self);
        for (std::size_t b = 0; b < batch; ++b) {
          if (g.requires_grad(wi)) {
            block_rows(g.grad_accumulator(wi), b, 1).noalias() +=
                block_rows(dout, b, 1) * block_rows(g.value(fi), b * n, n).transpose();
          }
          if (g.requires_grad(fi)) {
            block_rows(g.grad_accumulator(fi), b * n, n).noalias() +=
                block_rows(g.value(wi), b, 1).transpose() * block_rows(dout, b, 1);
          }
        }
      });
}

Var gate_mix(Var gates, Var a, Var b) {
  require_same_shape("gate_mix", a, b);
  const Tensor& S = gates.value();
  const std::size_t batch = a.value().rows(), f = a.value().cols();
  if (S.rows() != batch || S.cols() != 2) {
    throw DimensionError("gate_mix: gates " + shape_string(S.shape()) + " for inputs " +
                         shape_string(a.shape()));
  }
  Tensor out(a.shape());
  for (std::size_t r = 0; r < batch; ++r) {
    const double s0 = S[2 * r], s1 = S[2 * r + 1];
    for (std::size_t k = 0; k < f; ++k) {
      out[r * f + k] = s0 * a.value()[r * f + k] + s1 * b.value()[r * f + k];
    }
  }
  charge(2ULL * batch * f);
  const std::size_t si = gates.id(), ai = a.id(), bi = b.id();
  return graph_of("gate_mix", gates)
      .emit("gate_mix", std::move(out), {gates, a, b}, [si, ai, bi, batch, f](Graph& g, std::size_t self) {
        const Tensor& dout = g.grad(self);
        const Tensor& Sv = g.value(si);
        const Tensor& av = g.value(ai);
        const Tensor& bv = g.value(bi);
        for (std::size_t r = 0; r < batch; ++r) {
          double ds0 = 0.0, ds1 = 0.0;
          for (std::size_t k = 0; k < f; ++k) {
            ds0 += dout[r * f + k] * av[r * f + k];
            ds1 += dout[r * f + k] * bv[r * f + k];
          }
          if (g.requires_grad(si)) {
            Tensor& dS = g.grad_accumulator(si);
            dS[2 * r] += ds0;
            dS[2 * r + 1] += ds1;
          }
          if (g.requires_grad(ai)) {
            Tensor& da = g.grad_accumulator(ai);
            for (std::size_t k = 0; k < f; ++k) da[r * f + k] += Sv[2 * r] * dout[r * f + k];
          }
          if (g.requires_grad(bi)) {
            Tensor& db = g.grad_accumulator(bi);
            for (std::size_t k = 0; k < f; ++k) db[r * f + k] += Sv[2 * r + 1] * dout[r * f + k];
          }
        }
      });
}

Tensor affine_apply(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  Graph g(false);
  return affine_apply(g.constant(x), g.constant(weight), g.constant(bias)).value();
}

Tensor softmax(const Tensor& x) {
  Graph g(false);
  return softmax_rows(g.constant(x)).value();
}

}  // namespace skimnet::numerics
