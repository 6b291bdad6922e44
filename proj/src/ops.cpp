// Copyright 2026 The xsng Authors
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

#include "xsng/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xsng/error.hpp"
#include "xsng/simd/kernels.hpp"

namespace xsng {
namespace {

void require_rank(const Var& v, std::size_t rank, const char* op) {
  if (v.value().rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         ", got shape " + to_string(v.shape()));
  }
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a.shape()) +
                         " vs " + to_string(b.shape()));
  }
}

std::size_t rows_of(const Tensor& t) { return t.size() / t.shape().back(); }

template <typename Fwd, typename Deriv>
Var unary(Var a, Fwd fwd, Deriv deriv) {
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = fwd(x[i]);
  return a.tape().record(std::move(y), {a}, [deriv](const BackwardContext& ctx) {
    Tensor* gx = ctx.grad_of(0);
    if (gx == nullptr) return;
    const Tensor& x = ctx.input(0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      (*gx)[i] += ctx.grad[i] * deriv(x[i], ctx.output[i]);
    }
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw DimensionError("matmul: inner dimensions differ, " + to_string(a.shape()) + " x " +
                         to_string(b.shape()));
  }
  Tensor c({m, n});
  simd::gemm(false, false, m, n, k, a.value().ptr(), b.value().ptr(), c.ptr(), false);
  return a.tape().record(std::move(c), {a, b}, [m, k, n](const BackwardContext& ctx) {
    if (Tensor* ga = ctx.grad_of(0)) {
      simd::gemm(false, true, m, k, n, ctx.grad.ptr(), ctx.input(1).ptr(), ga->ptr(), true);
    }
    if (Tensor* gb = ctx.grad_of(1)) {
      simd::gemm(true, false, k, n, m, ctx.input(0).ptr(), ctx.grad.ptr(), gb->ptr(), true);
    }
  });
}

Var matmul_nt(Var a, Var b) {
  require_rank(a, 2, "matmul_nt");
  require_rank(b, 2, "matmul_nt");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[0];
  if (b.shape()[1] != k) {
    throw DimensionError("matmul_nt: inner dimensions differ, " + to_string(a.shape()) +
                         " x " + to_string(b.shape()) + "^T");
  }
  Tensor c({m, n});
  simd::gemm(false, true, m, n, k, a.value().ptr(), b.value().ptr(), c.ptr(), false);
  return a.tape().record(std::move(c), {a, b}, [m, k, n](const BackwardContext& ctx) {
    if (Tensor* ga = ctx.grad_of(0)) {
      simd::gemm(false, false, m, k, n, ctx.grad.ptr(), ctx.input(1).ptr(), ga->ptr(), true);
    }
    if (Tensor* gb = ctx.grad_of(1)) {
      simd::gemm(true, false, n, k, m, ctx.grad.ptr(), ctx.input(0).ptr(), gb->ptr(), true);
    }
  });
}

Var transpose(Var a) {
  require_rank(a, 2, "transpose");
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  const Tensor& x = a.value();
  Tensor y({n, m});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) y[j * m + i] = x[i * n + j];
  }
  return a.tape().record(std::move(y), {a}, [m, n](const BackwardContext& ctx) {
    Tensor* gx = ctx.grad_of(0);
    if (gx == nullptr) return;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) (*gx)[i * n + j] += ctx.grad[j * m + i];
    }
  });
}

Var reshape(Var a, Shape shape) {
  Tensor y = a.value().reshaped(std::move(shape));
  return a.tape().record(std::move(y), {a}, [](const BackwardContext& ctx) {
    Tensor* gx = ctx.grad_of(0);
    if (gx == nullptr) return;
    for (std::size_t i = 0; i < gx->size(); ++i) (*gx)[i] += ctx.grad[i];
  });
}

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  const Tensor& x = a.value();
  const Tensor& z = b.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + z[i];
  return a.tape().record(std::move(y), {a, b}, [](const BackwardContext& ctx) {
    for (std::size_t s = 0; s < 2; ++s) {
      if (Tensor* g = ctx.grad_of(s)) {
        for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += ctx.grad[i];
      }
    }
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  const Tensor& x = a.value();
  const Tensor& z = b.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - z[i];
  return a.tape().record(std::move(y), {a, b}, [](const BackwardContext& ctx) {
    if (Tensor* g = ctx.grad_of(0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += ctx.grad[i];
    }
    if (Tensor* g = ctx.grad_of(1)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] -= ctx.grad[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  const Tensor& x = a.value();
  const Tensor& z = b.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * z[i];
  return a.tape().record(std::move(y), {a, b}, [](const BackwardContext& ctx) {
    const Tensor& x = ctx.input(0);
    const Tensor& z = ctx.input(1);
    if (Tensor* g = ctx.grad_of(0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += ctx.grad[i] * z[i];
    }
    if (Tensor* g = ctx.grad_of(1)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += ctx.grad[i] * x[i];
    }
  });
}

Var scale(Var a, double s) {
  return unary(
      a, [s](double v) { return s * v; }, [s](double, double) { return s; });
}

Var add_scalar(Var a, double s) {
  return unary(
      a, [s](double v) { return v + s; }, [](double, double) { return 1.0; });
}

Var add_row(Var a, Var b) {
  require_rank(a, 2, "add_row");
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  if (b.value().size() != n) {
    throw DimensionError("add_row: row vector " + to_string(b.shape()) + " does not fit " +
                         to_string(a.shape()));
  }
  const Tensor& x = a.value();
  const Tensor& r = b.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) y[i * n + j] = x[i * n + j] + r[j];
  }
  return a.tape().record(std::move(y), {a, b}, [m, n](const BackwardContext& ctx) {
    if (Tensor* g = ctx.grad_of(0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += ctx.grad[i];
    }
    if (Tensor* g = ctx.grad_of(1)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) (*g)[j] += ctx.grad[i * n + j];
      }
    }
  });
}

Var mul_row(Var a, Var b) {
  require_rank(a, 2, "mul_row");
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  if (b.value().size() != n) {
    throw DimensionError("mul_row: row vector " + to_string(b.shape()) + " does not fit " +
                         to_string(a.shape()));
  }
  const Tensor& x = a.value();
  const Tensor& r = b.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) y[i * n + j] = x[i * n + j] * r[j];
  }
  return a.tape().record(std::move(y), {a, b}, [m, n](const BackwardContext& ctx) {
    const Tensor& x = ctx.input(0);
    const Tensor& r = ctx.input(1);
    if (Tensor* g = ctx.grad_of(0)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) (*g)[i * n + j] += ctx.grad[i * n + j] * r[j];
      }
    }
    if (Tensor* g = ctx.grad_of(1)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) (*g)[j] += ctx.grad[i * n + j] * x[i * n + j];
      }
    }
  });
}

Var add_channel(Var a, Var b) {
  const std::size_t c = a.shape()[0];
  if (b.value().size() != c) {
    throw DimensionError("add_channel: bias " + to_string(b.shape()) + " does not fit " +
                         to_string(a.shape()));
  }
  const std::size_t inner = a.value().size() / c;
  const Tensor& x = a.value();
  const Tensor& bias = b.value();
  Tensor y(x.shape());
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < inner; ++i) y[ch * inner + i] = x[ch * inner + i] + bias[ch];
  }
  return a.tape().record(std::move(y), {a, b}, [c, inner](const BackwardContext& ctx) {
    if (Tensor* g = ctx.grad_of(0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += ctx.grad[i];
    }
    if (Tensor* g = ctx.grad_of(1)) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        double s = 0.0;
        for (std::size_t i = 0; i < inner; ++i) s += ctx.grad[ch * inner + i];
        (*g)[ch] += s;
      }
    }
  });
}

Var relu(Var a) {
  return unary(
      a, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var leaky_relu(Var a, double slope) {
  return unary(
      a, [slope](double v) { return v > 0.0 ? v : slope * v; },
      [slope](double v, double) { return v > 0.0 ? 1.0 : slope; });
}

Var exp(Var a) {
  return unary(
      a, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Var log(Var a) {
  return unary(
      a, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Var abs(Var a) {
  return unary(
      a, [](double v) { return std::abs(v); },
      [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Var square(Var a) {
  return unary(
      a, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return a.tape().record(Tensor::scalar(s), {a}, [](const BackwardContext& ctx) {
    Tensor* g = ctx.grad_of(0);
    if (g == nullptr) return;
    const double up = ctx.grad[0];
    for (double& v : g->data()) v += up;
  });
}

Var mean(Var a) {
  const auto n = static_cast<double>(a.value().size());
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return a.tape().record(Tensor::scalar(s / n), {a}, [n](const BackwardContext& ctx) {
    Tensor* g = ctx.grad_of(0);
    if (g == nullptr) return;
    const double up = ctx.grad[0] / n;
    for (double& v : g->data()) v += up;
  });
}

Var mean_rows(Var a) {
  require_rank(a, 2, "mean_rows");
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  const Tensor& x = a.value();
  Tensor y({n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) y[j] += x[i * n + j];
  }
  for (std::size_t j = 0; j < n; ++j) y[j] /= static_cast<double>(m);
  return a.tape().record(std::move(y), {a}, [m, n](const BackwardContext& ctx) {
    Tensor* g = ctx.grad_of(0);
    if (g == nullptr) return;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) (*g)[i * n + j] += ctx.grad[j] / static_cast<double>(m);
    }
  });
}

namespace {

void softmax_inplace(const double* x, double* y, std::size_t n) {
  double mx = x[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, x[i]);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = std::exp(x[i] - mx);
    z += y[i];
  }
  for (std::size_t i = 0; i < n; ++i) y[i] /= z;
}

void softmax_backward(const double* y, const double* gy, double* gx, std::size_t n) {
  double dot = 0.0;
  for (std::size_t i = 0; i < n; ++i) dot += gy[i] * y[i];
  for (std::size_t i = 0; i < n; ++i) gx[i] += y[i] * (gy[i] - dot);
}

}  // namespace

Var average(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("average: no values");
  Var total = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) total = add(total, parts[i]);
  return scale(total, 1.0 / static_cast<double>(parts.size()));
}

Var softmax(Var a) {
  require_rank(a, 1, "softmax");
  const std::size_t n = a.value().size();
  Tensor y(a.shape());
  softmax_inplace(a.value().ptr(), y.ptr(), n);
  return a.tape().record(std::move(y), {a}, [n](const BackwardContext& ctx) {
    if (Tensor* g = ctx.grad_of(0)) softmax_backward(ctx.output.ptr(), ctx.grad.ptr(), g->ptr(), n);
  });
}

Var softmax_rows(Var a) {
  require_rank(a, 2, "softmax_rows");
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  Tensor y(a.shape());
  for (std::size_t i = 0; i < m; ++i) softmax_inplace(a.value().ptr() + i * n, y.ptr() + i * n, n);
  return a.tape().record(std::move(y), {a}, [m, n](const BackwardContext& ctx) {
    Tensor* g = ctx.grad_of(0);
    if (g == nullptr) return;
    for (std::size_t i = 0; i < m; ++i) {
      softmax_backward(ctx.output.ptr() + i * n, ctx.grad.ptr() + i * n, g->ptr() + i * n, n);
    }
  });
}

LayerNormResult layer_norm(Var x, double epsilon) {
  const Tensor& in = x.value();
  const std::size_t d = in.shape().back();
  const std::size_t rows = rows_of(in);
  Shape lead(in.shape().begin(), in.shape().end() - 1);
  if (lead.empty()) lead = {1};
  Tensor mu(lead);
  Tensor sigma(lead);
  Tensor y(in.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = in.ptr() + r * d;
    double m = 0.0;
    for (std::size_t j = 0; j < d; ++j) m += xr[j];
    m /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (xr[j] - m) * (xr[j] - m);
    var /= static_cast<double>(d);
    const double s = std::sqrt(var + epsilon);
    mu[r] = m;
    sigma[r] = s;
    for (std::size_t j = 0; j < d; ++j) y[r * d + j] = (xr[j] - m) / s;
  }
  Var out = x.tape().record(std::move(y), {x}, [rows, d, sigma](const BackwardContext& ctx) {
    Tensor* g = ctx.grad_of(0);
    if (g == nullptr) return;
    const auto dd = static_cast<double>(d);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* yr = ctx.output.ptr() + r * d;
      const double* gy = ctx.grad.ptr() + r * d;
      double mean_g = 0.0;
      double mean_gy = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        mean_g += gy[j];
        mean_gy += gy[j] * yr[j];
      }
      mean_g /= dd;
      mean_gy /= dd;
      double* gx = g->ptr() + r * d;
      for (std::size_t j = 0; j < d; ++j) gx[j] += (gy[j] - mean_g - yr[j] * mean_gy) / sigma[r];
    }
  });
  return LayerNormResult{out, std::move(mu), std::move(sigma)};
}

Var neg_log_pick(Var probs, std::size_t index, double floor, bool* clamped) {
  const Tensor& p = probs.value();
  if (index >= p.size()) {
    throw LookupError("neg_log_pick: index " + std::to_string(index) + " outside " +
                      to_string(p.shape()));
  }
  const bool hit = !(p[index] > floor);
  if (clamped != nullptr) *clamped = hit;
  const double value = -std::log(hit ? floor : p[index]);
  return probs.tape().record(Tensor::scalar(value), {probs},
                             [index, hit](const BackwardContext& ctx) {
                               Tensor* g = ctx.grad_of(0);
                               if (g == nullptr || hit) return;
                               (*g)[index] -= ctx.grad[0] / ctx.input(0)[index];
                             });
}

Var gather_rows(Var table, std::span<const int> ids) {
  require_rank(table, 2, "gather_rows");
  const std::size_t v = table.shape()[0], d = table.shape()[1];
  if (ids.empty()) throw DimensionError("gather_rows: empty id list");
  std::vector<int> idx(ids.begin(), ids.end());
  for (std::size_t t = 0; t < idx.size(); ++t) {
    if (idx[t] < 0 || static_cast<std::size_t>(idx[t]) >= v) {
      throw LookupError("id " + std::to_string(idx[t]) + " at position " + std::to_string(t) +
                        " outside table of " + std::to_string(v) + " rows");
    }
  }
  const Tensor& src = table.value();
  Tensor y({idx.size(), d});
  for (std::size_t t = 0; t < idx.size(); ++t) {
    std::copy_n(src.ptr() + static_cast<std::size_t>(idx[t]) * d, d, y.ptr() + t * d);
  }
  return table.tape().record(std::move(y), {table}, [idx = std::move(idx), d](const BackwardContext& ctx) {
    Tensor* g = ctx.grad_of(0);
    if (g == nullptr) return;
    for (std::size_t t = 0; t < idx.size(); ++t) {
      double* row = g->ptr() + static_cast<std::size_t>(idx[t]) * d;
      const double* up = ctx.grad.ptr() + t * d;
      for (std::size_t j = 0; j < d; ++j) row[j] += up[j];
    }
  });
}

Var slice_rows(Var a, std::size_t lo, std::size_t hi) {
  require_rank(a, 2, "slice_rows");
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  if (lo >= hi || hi > m) {
    throw DimensionError("slice_rows: [" + std::to_string(lo) + ", " + std::to_string(hi) +
                         ") invalid for " + to_string(a.shape()));
  }
  Tensor y({hi - lo, n});
  std::copy_n(a.value().ptr() + lo * n, (hi - lo) * n, y.ptr());
  return a.tape().record(std::move(y), {a}, [lo, n](const BackwardContext& ctx) {
    Tensor* g = ctx.grad_of(0);
    if (g == nullptr) return;
    for (std::size_t i = 0; i < ctx.grad.size(); ++i) (*g)[lo * n + i] += ctx.grad[i];
  });
}

Var slice_cols(Var a, std::size_t lo, std::size_t hi) {
  require_rank(a, 2, "slice_cols");
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  if (lo >= hi || hi > n) {
    throw DimensionError("slice_cols: [" + std::to_string(lo) + ", " + std::to_string(hi) +
                         ") invalid for " + to_string(a.shape()));
  }
  const std::size_t w = hi - lo;
  Tensor y({m, w});
  for (std::size_t i = 0; i < m; ++i) std::copy_n(a.value().ptr() + i * n + lo, w, y.ptr() + i * w);
  return a.tape().record(std::move(y), {a}, [m, n, lo, w](const BackwardContext& ctx) {
    Tensor* g = ctx.grad_of(0);
    if (g == nullptr) return;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < w; ++j) (*g)[i * n + lo + j] += ctx.grad[i * w + j];
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const std::size_t n = parts[0].shape().at(1);
  std::size_t m = 0;
  for (const Var& p : parts) {
    require_rank(p, 2, "concat_rows");
    if (p.shape()[1] != n) {
      throw DimensionError("concat_rows: column count mismatch " + to_string(parts[0].shape()) +
                           " vs " + to_string(p.shape()));
    }
    m += p.shape()[0];
  }
  Tensor y({m, n});
  std::vector<std::size_t> offsets;
  std::size_t at = 0;
  for (const Var& p : parts) {
    offsets.push_back(at);
    std::copy_n(p.value().ptr(), p.value().size(), y.ptr() + at);
    at += p.value().size();
  }
  return parts[0].tape().record(std::move(y), parts, [offsets](const BackwardContext& ctx) {
    for (std::size_t s = 0; s < offsets.size(); ++s) {
      Tensor* g = ctx.grad_of(s);
      if (g == nullptr) continue;
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += ctx.grad[offsets[s] + i];
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t m = parts[0].shape().at(0);
  std::size_t n = 0;
  std::vector<std::size_t> widths;
  for (const Var& p : parts) {
    require_rank(p, 2, "concat_cols");
    if (p.shape()[0] != m) {
      throw DimensionError("concat_cols: row count mismatch " + to_string(parts[0].shape()) +
                           " vs " + to_string(p.shape()));
    }
    widths.push_back(p.shape()[1]);
    n += p.shape()[1];
  }
  Tensor y({m, n});
  std::size_t col = 0;
  for (std::size_t s = 0; s < parts.size(); ++s) {
    const Tensor& x = parts[s].value();
    for (std::size_t i = 0; i < m; ++i) std::copy_n(x.ptr() + i * widths[s], widths[s], y.ptr() + i * n + col);
    col += widths[s];
  }
  return parts[0].tape().record(std::move(y), parts, [m, n, widths](const BackwardContext& ctx) {
    std::size_t col = 0;
    for (std::size_t s = 0; s < widths.size(); ++s) {
      if (Tensor* g = ctx.grad_of(s)) {
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < widths[s]; ++j) (*g)[i * widths[s] + j] += ctx.grad[i * n + col + j];
        }
      }
      col += widths[s];
    }
  });
}

Var conv1d_time_major(Var x, Var w, Padding padding) {
  require_rank(x, 2, "conv1d");
  require_rank(w, 3, "conv1d");
  const std::size_t t_in = x.shape()[0], c_in = x.shape()[1];
  const std::size_t c_out = w.shape()[0], k = w.shape()[2];
  if (w.shape()[1] != c_in) {
    throw DimensionError("conv1d: kernel " + to_string(w.shape()) + " expects " +
                         std::to_string(w.shape()[1]) + " input channels, input has " +
                         std::to_string(c_in));
  }
  if (padding == Padding::Same && k % 2 == 0) {
    throw ConfigError("conv1d: same padding needs an odd kernel, got k=" + std::to_string(k));
  }
  if (padding == Padding::Valid && t_in < k) {
    throw DimensionError("conv1d: input length " + std::to_string(t_in) +
                         " shorter than kernel " + std::to_string(k));
  }
  const std::size_t pad = padding == Padding::Same ? (k - 1) / 2 : 0;
  const std::size_t t_out = padding == Padding::Same ? t_in : t_in - k + 1;
  const std::size_t ck = c_in * k;

  // cols[t, i*k + j] = x[t + j - pad, i]
  Tensor cols({t_out, ck});
  const Tensor& xv = x.value();
  for (std::size_t t = 0; t < t_out; ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + j) - static_cast<std::ptrdiff_t>(pad);
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(t_in)) continue;
      const double* xr = xv.ptr() + static_cast<std::size_t>(src) * c_in;
      for (std::size_t i = 0; i < c_in; ++i) cols[t * ck + i * k + j] = xr[i];
    }
  }
  Tensor y({t_out, c_out});
  simd::gemm(false, true, t_out, c_out, ck, cols.ptr(), w.value().ptr(), y.ptr(), false);
  return x.tape().record(
      std::move(y), {x, w},
      [cols = std::move(cols), t_in, t_out, c_in, c_out, k, ck, pad](const BackwardContext& ctx) {
        if (Tensor* gw = ctx.grad_of(1)) {
          simd::gemm(true, false, c_out, ck, t_out, ctx.grad.ptr(), cols.ptr(), gw->ptr(), true);
        }
        Tensor* gx = ctx.grad_of(0);
        if (gx == nullptr) return;
        Tensor gcols({t_out, ck});
        simd::gemm(false, false, t_out, ck, c_out, ctx.grad.ptr(), ctx.input(1).ptr(), gcols.ptr(), false);
        for (std::size_t t = 0; t < t_out; ++t) {
          for (std::size_t j = 0; j < k; ++j) {
            const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + j) - static_cast<std::ptrdiff_t>(pad);
            if (src < 0 || src >= static_cast<std::ptrdiff_t>(t_in)) continue;
            double* gr = gx->ptr() + static_cast<std::size_t>(src) * c_in;
            for (std::size_t i = 0; i < c_in; ++i) gr[i] += gcols[t * ck + i * k + j];
          }
        }
      });
}

Var conv1d(Var x, Var w, Padding padding) {
  require_rank(x, 2, "conv1d");
  return transpose(conv1d_time_major(transpose(x), w, padding));
}

Var conv2d(Var x, Var w) {
  require_rank(x, 3, "conv2d");
  require_rank(w, 4, "conv2d");
  const std::size_t c_in = x.shape()[0], h = x.shape()[1], wd = x.shape()[2];
  const std::size_t c_out = w.shape()[0], kh = w.shape()[2], kw = w.shape()[3];
  if (w.shape()[1] != c_in) {
    throw DimensionError("conv2d: kernel " + to_string(w.shape()) + " does not match input " +
                         to_string(x.shape()));
  }
  if (kh % 2 == 0 || kw % 2 == 0) {
    throw ConfigError("conv2d: same padding needs odd kernel sizes, got " + to_string(w.shape()));
  }
  if (h < kh || wd < kw) {
    throw DimensionError("conv2d: input " + to_string(x.shape()) + " smaller than kernel " +
                         std::to_string(kh) + "x" + std::to_string(kw));
  }
  const std::size_t ph = (kh - 1) / 2, pw = (kw - 1) / 2;
  const std::size_t ck = c_in * kh * kw;
  const std::size_t hw = h * wd;

  // cols[(i*kh + a)*kw + b, r*W + c] = x[i, r + a - ph, c + b - pw]
  auto im2col = [=](const Tensor& src, Tensor& cols) {
    for (std::size_t i = 0; i < c_in; ++i) {
      for (std::size_t a = 0; a < kh; ++a) {
        for (std::size_t b = 0; b < kw; ++b) {
          double* row = cols.ptr() + ((i * kh + a) * kw + b) * hw;
          for (std::size_t r = 0; r < h; ++r) {
            const std::ptrdiff_t sr = static_cast<std::ptrdiff_t>(r + a) - static_cast<std::ptrdiff_t>(ph);
            if (sr < 0 || sr >= static_cast<std::ptrdiff_t>(h)) continue;
            for (std::size_t c = 0; c < wd; ++c) {
              const std::ptrdiff_t sc = static_cast<std::ptrdiff_t>(c + b) - static_cast<std::ptrdiff_t>(pw);
              if (sc < 0 || sc >= static_cast<std::ptrdiff_t>(wd)) continue;
              row[r * wd + c] = src[(i * h + static_cast<std::size_t>(sr)) * wd + static_cast<std::size_t>(sc)];
            }
          }
        }
      }
    }
  };

  Tensor cols({ck, hw});
  im2col(x.value(), cols);
  Tensor y({c_out, h, wd});
  simd::gemm(false, false, c_out, hw, ck, w.value().ptr(), cols.ptr(), y.ptr(), false);
  return x.tape().record(
      std::move(y), {x, w},
      [cols = std::move(cols), c_in, h, wd, c_out, kh, kw, ph, pw, ck, hw](const BackwardContext& ctx) {
        if (Tensor* gw = ctx.grad_of(1)) {
          simd::gemm(false, true, c_out, ck, hw, ctx.grad.ptr(), cols.ptr(), gw->ptr(), true);
        }
        Tensor* gx = ctx.grad_of(0);
        if (gx == nullptr) return;
        Tensor gcols({ck, hw});
        simd::gemm(true, false, ck, hw, c_out, ctx.input(1).ptr(), ctx.grad.ptr(), gcols.ptr(), false);
        for (std::size_t i = 0; i < c_in; ++i) {
          for (std::size_t a = 0; a < kh; ++a) {
            for (std::size_t b = 0; b < kw; ++b) {
              const double* row = gcols.ptr() + ((i * kh + a) * kw + b) * hw;
              for (std::size_t r = 0; r < h; ++r) {
                const std::ptrdiff_t sr = static_cast<std::ptrdiff_t>(r + a) - static_cast<std::ptrdiff_t>(ph);
                if (sr < 0 || sr >= static_cast<std::ptrdiff_t>(h)) continue;
                for (std::size_t c = 0; c < wd; ++c) {
                  const std::ptrdiff_t sc = static_cast<std::ptrdiff_t>(c + b) - static_cast<std::ptrdiff_t>(pw);
                  if (sc < 0 || sc >= static_cast<std::ptrdiff_t>(wd)) continue;
                  (*gx)[(i * h + static_cast<std::size_t>(sr)) * wd + static_cast<std::size_t>(sc)] += row[r * wd + c];
                }
              }
            }
          }
        }
      });
}

Var grl(Var a, double lambda) {
  if (!(lambda >= 0.0)) throw ContractError("grl: lambda must be >= 0, got " + std::to_string(lambda));
  Tensor y = a.value();
  return a.tape().record(std::move(y), {a}, [lambda](const BackwardContext& ctx) {
    Tensor* g = ctx.grad_of(0);
    if (g == nullptr) return;
    for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += -lambda * ctx.grad[i];
  });
}

}  // namespace xsng
