/*
 * Copyright 2026 The sadsp Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "sadsp/ndkit/ops.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sadsp/errors.hpp"

namespace sadsp::nd {
namespace {

Graph& graph_of(const Var& a) {
  if (!a.valid()) throw ContractError("operation on an empty Var");
  return *a.graph();
}

Graph& graph_of(const Var& a, const Var& b) {
  Graph& g = graph_of(a);
  if (b.graph() != &g) throw ContractError("operands recorded on different graphs");
  return g;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

Tensor like(const Tensor& t) { return Tensor::zeros(t.shape()); }

// Elementwise unary op with derivative expressed through input x and output y.
template <typename Forward, typename Derivative>
Var unary(const Var& a, Forward forward, Derivative derivative) {
  Graph& g = graph_of(a);
  const Tensor& x = a.value();
  Tensor out = like(x);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = forward(x[i]);
  const std::size_t ia = a.id();
  const std::size_t self = g.size();
  return g.record(std::move(out), {ia}, [ia, self, derivative](Graph& gr, std::span<const double> up) {
    if (!gr.requires_grad(ia)) return;
    const Tensor& xv = gr.value(ia);
    const Tensor& yv = gr.value(self);
    auto ga = gr.grad_of(ia);
    for (std::size_t i = 0; i < up.size(); ++i) ga[i] += up[i] * derivative(xv[i], yv[i]);
  });
}

}  // namespace

double sigmoid_value(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor softmax_values(const Tensor& logits) {
  Tensor out = like(logits);
  const std::size_t rows = logits.rows();
  const std::size_t cols = logits.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = logits.values().data() + r * cols;
    double* o = out.values().data() + r * cols;
    const double top = *std::max_element(in, in + cols);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      o[c] = std::exp(in[c] - top);
      total += o[c];
    }
    for (std::size_t c = 0; c < cols; ++c) o[c] /= total;
  }
  return out;
}

Var matmul(const Var& a, const Var& b) {
  Graph& g = graph_of(a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  if (x.rank() != 2 || y.rank() != 2) throw DimensionError("matmul expects rank-2 operands");
  const std::size_t m = x.rows(), k = x.cols(), n = y.cols();
  if (y.rows() != k) {
    throw DimensionError("matmul: inner dimensions disagree " + shape_string(x.shape()) + " * " +
                         shape_string(y.shape()));
  }
  Tensor out = Tensor::zeros({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double xv = x[i * k + p];
      if (xv == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += xv * y[p * n + j];
    }
  }
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(std::move(out), {ia, ib}, [ia, ib, m, k, n](Graph& gr, std::span<const double> up) {
    const Tensor& xv = gr.value(ia);
    const Tensor& yv = gr.value(ib);
    if (gr.requires_grad(ia)) {
      // dA = dC * B^T
      auto ga = gr.grad_of(ia);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += up[i * n + j] * yv[p * n + j];
          ga[i * k + p] += acc;
        }
      }
    }
    if (gr.requires_grad(ib)) {
      // dB = A^T * dC
      auto gb = gr.grad_of(ib);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double xip = xv[i * k + p];
          if (xip == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += xip * up[i * n + j];
        }
      }
    }
  });
}

Var add(const Var& a, const Var& b) {
  Graph& g = graph_of(a, b);
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(std::move(out), {ia, ib}, [ia, ib](Graph& gr, std::span<const double> up) {
    for (std::size_t id : {ia, ib}) {
      if (!gr.requires_grad(id)) continue;
      auto gx = gr.grad_of(id);
      for (std::size_t i = 0; i < up.size(); ++i) gx[i] += up[i];
    }
  });
}

Var sub(const Var& a, const Var& b) {
  Graph& g = graph_of(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(std::move(out), {ia, ib}, [ia, ib](Graph& gr, std::span<const double> up) {
    if (gr.requires_grad(ia)) {
      auto gx = gr.grad_of(ia);
      for (std::size_t i = 0; i < up.size(); ++i) gx[i] += up[i];
    }
    if (gr.requires_grad(ib)) {
      auto gy = gr.grad_of(ib);
      for (std::size_t i = 0; i < up.size(); ++i) gy[i] -= up[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  Graph& g = graph_of(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(std::move(out), {ia, ib}, [ia, ib](Graph& gr, std::span<const double> up) {
    const Tensor& xv = gr.value(ia);
    const Tensor& yv = gr.value(ib);
    if (gr.requires_grad(ia)) {
      auto gx = gr.grad_of(ia);
      for (std::size_t i = 0; i < up.size(); ++i) gx[i] += up[i] * yv[i];
    }
    if (gr.requires_grad(ib)) {
      auto gy = gr.grad_of(ib);
      for (std::size_t i = 0; i < up.size(); ++i) gy[i] += up[i] * xv[i];
    }
  });
}

Var neg(const Var& a) { return scale(a, -1.0); }

// NaN passes through so the divergence guard downstream can see it.
Var relu(const Var& a) {
  return unary(
      a, [](double x) { return x > 0.0 || std::isnan(x) ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(const Var& a) {
  return unary(a, sigmoid_value, [](double, double y) { return y * (1.0 - y); });
}

Var log(const Var& a) {
  return unary(
      a, [](double x) { return std::log(std::max(x, kLogFloor)); },
      [](double x, double) { return x > kLogFloor ? 1.0 / x : 0.0; });
}

Var square(const Var& a) {
  return unary(
      a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var scale(const Var& a, double factor) {
  return unary(
      a, [factor](double x) { return factor * x; }, [factor](double, double) { return factor; });
}

Var add_scalar(const Var& a, double offset) {
  return unary(
      a, [offset](double x) { return x + offset; }, [](double, double) { return 1.0; });
}

Var add_bias(const Var& a, const Var& bias) {
  Graph& g = graph_of(a, bias);
  const Tensor& x = a.value();
  const Tensor& b = bias.value();
  const std::size_t rows = x.rows(), cols = x.cols();
  if (b.size() != cols) {
    throw DimensionError("add_bias: bias " + shape_string(b.shape()) + " for input " + shape_string(x.shape()));
  }
  Tensor out = x;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += b[c];
  }
  const std::size_t ia = a.id(), ib = bias.id();
  return g.record(std::move(out), {ia, ib}, [ia, ib, rows, cols](Graph& gr, std::span<const double> up) {
    if (gr.requires_grad(ia)) {
      auto gx = gr.grad_of(ia);
      for (std::size_t i = 0; i < up.size(); ++i) gx[i] += up[i];
    }
    if (gr.requires_grad(ib)) {
      auto gb = gr.grad_of(ib);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) gb[c] += up[r * cols + c];
      }
    }
  });
}

Var softmax(const Var& logits) {
  Graph& g = graph_of(logits);
  Tensor out = softmax_values(logits.value());
  const std::size_t rows = out.rows(), cols = out.cols();
  const std::size_t ia = logits.id();
  const std::size_t self = g.size();
  return g.record(std::move(out), {ia}, [ia, self, rows, cols](Graph& gr, std::span<const double> up) {
    if (!gr.requires_grad(ia)) return;
    const Tensor& y = gr.value(self);
    auto gx = gr.grad_of(ia);
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += up[r * cols + c] * y[r * cols + c];
      for (std::size_t c = 0; c < cols; ++c) {
        gx[r * cols + c] += y[r * cols + c] * (up[r * cols + c] - dot);
      }
    }
  });
}

Var sum(const Var& a) {
  Graph& g = graph_of(a);
  double total = 0.0;
  for (double v : a.value().values()) total += v;
  const std::size_t ia = a.id();
  return g.record(Tensor::scalar(total), {ia}, [ia](Graph& gr, std::span<const double> up) {
    if (!gr.requires_grad(ia)) return;
    auto gx = gr.grad_of(ia);
    for (double& v : gx) v += up[0];
  });
}

Var mean(const Var& a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw DimensionError("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var pick(const Var& a, std::span<const std::size_t> index) {
  Graph& g = graph_of(a);
  const Tensor& x = a.value();
  const std::size_t rows = x.rows(), cols = x.cols();
  if (index.size() != rows) throw DimensionError("pick: one index per row required");
  std::vector<double> values(rows);
  std::vector<std::size_t> flat(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    if (index[r] >= cols) throw DimensionError("pick: index out of range");
    flat[r] = r * cols + index[r];
    values[r] = x[flat[r]];
  }
  const std::size_t ia = a.id();
  return g.record(Tensor::vector(std::move(values)), {ia},
                  [ia, flat = std::move(flat)](Graph& gr, std::span<const double> up) {
                    if (!gr.requires_grad(ia)) return;
                    auto gx = gr.grad_of(ia);
                    for (std::size_t r = 0; r < flat.size(); ++r) gx[flat[r]] += up[r];
                  });
}

Var slice_cols(const Var& a, std::size_t begin, std::size_t end) {
  Graph& g = graph_of(a);
  const Tensor& x = a.value();
  if (x.rank() != 2 || begin > end || end > x.cols()) throw DimensionError("slice_cols: bad range");
  const std::size_t rows = x.rows(), cols = x.cols(), width = end - begin;
  Tensor out = Tensor::zeros({rows, width});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < width; ++c) out[r * width + c] = x[r * cols + begin + c];
  }
  const std::size_t ia = a.id();
  return g.record(std::move(out), {ia}, [ia, rows, cols, begin, width](Graph& gr, std::span<const double> up) {
    if (!gr.requires_grad(ia)) return;
    auto gx = gr.grad_of(ia);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < width; ++c) gx[r * cols + begin + c] += up[r * width + c];
    }
  });
}

Var concat_rows(const Var& a, const Var& b) {
  Graph& g = graph_of(a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  if (x.rank() != 2 || y.rank() != 2 || x.cols() != y.cols()) {
    throw DimensionError("concat_rows: " + shape_string(x.shape()) + " and " + shape_string(y.shape()));
  }
  std::vector<double> values(x.values().begin(), x.values().end());
  values.insert(values.end(), y.values().begin(), y.values().end());
  const std::size_t split = x.size();
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(Tensor({x.rows() + y.rows(), x.cols()}, std::move(values)), {ia, ib},
                  [ia, ib, split](Graph& gr, std::span<const double> up) {
                    if (gr.requires_grad(ia)) {
                      auto gx = gr.grad_of(ia);
                      for (std::size_t i = 0; i < split; ++i) gx[i] += up[i];
                    }
                    if (gr.requires_grad(ib)) {
                      auto gy = gr.grad_of(ib);
                      for (std::size_t i = split; i < up.size(); ++i) gy[i - split] += up[i];
                    }
                  });
}

Var detach(const Var& a) { return graph_of(a).constant(a.value()); }

}  // namespace sadsp::nd
