// Copyright 2026 The djpeg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "djpeg/nn/ops.hpp"

#include <algorithm>
#include <cmath>

#include "djpeg/error.hpp"
#include "djpeg/simd/kernels.hpp"
#include "djpeg/util/rng.hpp"

namespace djpeg::nn {
namespace {

void require_size(std::size_t got, std::size_t want, const char* what) {
  require(got == want, ErrorCode::kShapeError,
          std::string(what) + " has " + std::to_string(got) + " elements, expected " +
              std::to_string(want));
}

void require_mask(std::span<const double> mask, std::size_t want, const char* what) {
  if (!mask.empty()) require_size(mask.size(), want, what);
}

// Activates the 4n pre-activations in place.
void activate_gates(double* z, std::size_t n) {
  for (std::size_t j = 0; j < 3 * n; ++j) z[j] = sigmoid(z[j]);
  for (std::size_t j = 3 * n; j < 4 * n; ++j) z[j] = std::tanh(z[j]);
}

void masked_copy(const double* src, std::span<const double> mask, double* dst, std::size_t n) {
  if (mask.empty()) {
    std::copy_n(src, n, dst);
  } else {
    for (std::size_t j = 0; j < n; ++j) dst[j] = src[j] * mask[j];
  }
}

}  // namespace

void glorot_uniform_fill(std::span<double> out, std::size_t fan_in, std::size_t fan_out,
                         std::mt19937_64& rng) {
  require(fan_in + fan_out > 0, ErrorCode::kDomainError, "glorot fans must not both be zero");
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : out) v = util::uniform(rng, -limit, limit);
}

Tensor glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out,
                      std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  glorot_uniform_fill(t.data, fan_in, fan_out, rng);
  return t;
}

void orthogonal_fill(std::span<double> out, std::size_t n, std::mt19937_64& rng) {
  require_size(out.size(), n * n, "orthogonal matrix");
  // Columns of a Gaussian matrix, orthonormalized by Gram-Schmidt run twice.
  // The projection keeps R's diagonal positive, which fixes the signs.
  std::vector<std::vector<double>> cols(n, std::vector<double>(n));
  for (auto& c : cols) {
    for (double& v : c) v = util::normal(rng);
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < k; ++j) {
        double proj = 0.0;
        for (std::size_t r = 0; r < n; ++r) proj += cols[j][r] * cols[k][r];
        for (std::size_t r = 0; r < n; ++r) cols[k][r] -= proj * cols[j][r];
      }
    }
    double norm = 0.0;
    for (double v : cols[k]) norm += v * v;
    norm = std::sqrt(norm);
    require(norm > 1e-12, ErrorCode::kNumericError, "degenerate orthogonal draw");
    for (double& v : cols[k]) v /= norm;
  }
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) out[r * n + c] = cols[c][r];
  }
}

Tensor orthogonal_init(std::size_t n, std::mt19937_64& rng) {
  Tensor t({n, n});
  orthogonal_fill(t.data, n, rng);
  return t;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

LstmState lstm_cell(std::span<const double> x, std::span<const double> s_prev,
                    std::span<const double> c_prev, const LstmCellParams& p,
                    std::span<const double> x_mask, std::span<const double> s_mask) {
  const std::size_t n = p.n, m = p.m;
  require_size(x.size(), m, "lstm input");
  require_size(s_prev.size(), n, "lstm previous state");
  require_size(c_prev.size(), n, "lstm previous cell");
  require_mask(x_mask, m, "lstm input mask");
  require_mask(s_mask, n, "lstm state mask");

  std::vector<double> xm(m), sm(n), z(p.b, p.b + 4 * n);
  masked_copy(x.data(), x_mask, xm.data(), m);
  masked_copy(s_prev.data(), s_mask, sm.data(), n);
  const auto& k = simd::kernels();
  k.gemv(p.W, 4 * n, m, xm.data(), z.data());
  k.gemv(p.V, 4 * n, n, sm.data(), z.data());
  activate_gates(z.data(), n);

  LstmState out{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t j = 0; j < n; ++j) {
    out.c[j] = z[j] * c_prev[j] + z[n + j] * z[3 * n + j];
    out.s[j] = z[2 * n + j] * std::tanh(out.c[j]);
  }
  return out;
}

void lstm_forward(const LstmCellParams& p, std::span<const double> xs, std::size_t steps,
                  bool reverse, std::span<const double> x_mask,
                  std::span<const double> s_mask, LstmTrace& trace, std::span<double> out,
                  std::size_t out_stride) {
  const std::size_t n = p.n, m = p.m;
  require_size(xs.size(), steps * m, "lstm sequence");
  require_mask(x_mask, m, "lstm input mask");
  require_mask(s_mask, n, "lstm state mask");
  require(steps == 0 || out.size() >= (steps - 1) * out_stride + n, ErrorCode::kShapeError,
          "lstm output buffer too small");

  trace.steps = steps;
  trace.x.resize(steps * m);
  trace.s_in.resize(steps * n);
  trace.gates.resize(steps * 4 * n);
  trace.c.assign((steps + 1) * n, 0.0);
  trace.tanh_c.resize(steps * n);

  const auto& k = simd::kernels();
  std::vector<double> s(n, 0.0);
  for (std::size_t step = 0; step < steps; ++step) {
    const std::size_t t = reverse ? steps - 1 - step : step;
    double* x = &trace.x[step * m];
    double* s_in = &trace.s_in[step * n];
    double* z = &trace.gates[step * 4 * n];
    masked_copy(&xs[t * m], x_mask, x, m);
    masked_copy(s.data(), s_mask, s_in, n);
    std::copy_n(p.b, 4 * n, z);
    k.gemv(p.W, 4 * n, m, x, z);
    k.gemv(p.V, 4 * n, n, s_in, z);
    activate_gates(z, n);

    const double* c_prev = &trace.c[step * n];
    double* c = &trace.c[(step + 1) * n];
    double* tc = &trace.tanh_c[step * n];
    for (std::size_t j = 0; j < n; ++j) {
      c[j] = z[j] * c_prev[j] + z[n + j] * z[3 * n + j];
      tc[j] = std::tanh(c[j]);
      s[j] = z[2 * n + j] * tc[j];
    }
    std::copy_n(s.data(), n, &out[t * out_stride]);
  }
}

void lstm_backward(const LstmCellParams& p, const LstmTrace& trace, bool reverse,
                   std::span<const double> x_mask, std::span<const double> s_mask,
                   std::span<const double> d_out, std::size_t out_stride,
                   const LstmCellGrads& g, std::span<double> dxs) {
  const std::size_t n = p.n, m = p.m, steps = trace.steps;
  require_size(dxs.size(), steps * m, "lstm input gradient");
  const auto& k = simd::kernels();

  std::vector<double> dc_next(n, 0.0), ds_next(n, 0.0), dz(4 * n), dx(m), ds_rec(n);
  for (std::size_t step = steps; step-- > 0;) {
    const std::size_t t = reverse ? steps - 1 - step : step;
    const double* z = &trace.gates[step * 4 * n];
    const double* c_prev = &trace.c[step * n];
    const double* tc = &trace.tanh_c[step * n];
    for (std::size_t j = 0; j < n; ++j) {
      const double f = z[j], i = z[n + j], o = z[2 * n + j], cand = z[3 * n + j];
      const double dsj = d_out[t * out_stride + j] + ds_next[j];
      const double dcj = dc_next[j] + dsj * o * (1.0 - tc[j] * tc[j]);
      dz[j] = dcj * c_prev[j] * f * (1.0 - f);
      dz[n + j] = dcj * cand * i * (1.0 - i);
      dz[2 * n + j] = dsj * tc[j] * o * (1.0 - o);
      dz[3 * n + j] = dcj * i * (1.0 - cand * cand);
      dc_next[j] = dcj * f;
    }
    k.ger(g.W, 4 * n, m, dz.data(), &trace.x[step * m]);
    k.ger(g.V, 4 * n, n, dz.data(), &trace.s_in[step * n]);
    k.axpy(1.0, dz.data(), g.b, 4 * n);

    std::fill(dx.begin(), dx.end(), 0.0);
    k.gemv_t(p.W, 4 * n, m, dz.data(), dx.data());
    double* dxt = &dxs[t * m];
    for (std::size_t j = 0; j < m; ++j) dxt[j] += x_mask.empty() ? dx[j] : dx[j] * x_mask[j];

    std::fill(ds_rec.begin(), ds_rec.end(), 0.0);
    k.gemv_t(p.V, 4 * n, n, dz.data(), ds_rec.data());
    for (std::size_t j = 0; j < n; ++j) {
      ds_next[j] = s_mask.empty() ? ds_rec[j] : ds_rec[j] * s_mask[j];
    }
  }
}

std::vector<double> per_bin_affine(double h, double q, std::span<const double> alpha,
                                   std::span<const double> beta,
                                   std::span<const double> gamma) {
  require_size(beta.size(), alpha.size(), "affine beta");
  require_size(gamma.size(), alpha.size(), "affine gamma");
  std::vector<double> out(alpha.size());
  for (std::size_t c = 0; c < alpha.size(); ++c) out[c] = alpha[c] * h + beta[c] * q + gamma[c];
  return out;
}

void batch_norm_forward(std::span<const double> x, std::size_t rows, std::size_t channels,
                        std::span<const double> scale, std::span<const double> shift,
                        std::span<const double> running_mean,
                        std::span<const double> running_var, Mode mode,
                        std::span<double> y, BatchNormCache& cache) {
  require_size(x.size(), rows * channels, "batch norm input");
  require_size(y.size(), rows * channels, "batch norm output");
  require_size(scale.size(), channels, "batch norm scale");
  require_size(shift.size(), channels, "batch norm shift");
  require_size(running_mean.size(), channels, "batch norm running mean");
  require_size(running_var.size(), channels, "batch norm running variance");

  cache.rows = rows;
  cache.channels = channels;
  cache.mean.assign(channels, 0.0);
  cache.var.assign(channels, 0.0);
  cache.inv_std.resize(channels);
  cache.xhat.resize(rows * channels);

  if (mode == Mode::kTrain) {
    require(rows > 0, ErrorCode::kShapeError, "batch norm needs at least one row");
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < channels; ++c) cache.mean[c] += x[r * channels + c];
    }
    for (double& v : cache.mean) v /= static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < channels; ++c) {
        const double d = x[r * channels + c] - cache.mean[c];
        cache.var[c] += d * d;
      }
    }
    for (double& v : cache.var) v /= static_cast<double>(rows);
  } else {
    std::copy(running_mean.begin(), running_mean.end(), cache.mean.begin());
    std::copy(running_var.begin(), running_var.end(), cache.var.begin());
  }
  for (std::size_t c = 0; c < channels; ++c) {
    cache.inv_std[c] = 1.0 / std::sqrt(cache.var[c] + kBnEpsilon);
  }
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t i = r * channels + c;
      cache.xhat[i] = (x[i] - cache.mean[c]) * cache.inv_std[c];
      y[i] = scale[c] * cache.xhat[i] + shift[c];
    }
  }
}

void batch_norm_backward(const BatchNormCache& cache, std::span<const double> scale,
                         std::span<const double> dy, std::span<double> dx,
                         std::span<double> d_scale, std::span<double> d_shift) {
  const std::size_t rows = cache.rows, ch = cache.channels;
  require_size(dy.size(), rows * ch, "batch norm output gradient");
  require_size(dx.size(), rows * ch, "batch norm input gradient");
  std::vector<double> sum_dxhat(ch, 0.0), sum_dxhat_xhat(ch, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < ch; ++c) {
      const std::size_t i = r * ch + c;
      const double dxhat = dy[i] * scale[c];
      sum_dxhat[c] += dxhat;
      sum_dxhat_xhat[c] += dxhat * cache.xhat[i];
      d_scale[c] += dy[i] * cache.xhat[i];
      d_shift[c] += dy[i];
    }
  }
  const double inv_rows = 1.0 / static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < ch; ++c) {
      const std::size_t i = r * ch + c;
      const double dxhat = dy[i] * scale[c];
      dx[i] = cache.inv_std[c] * (dxhat - inv_rows * sum_dxhat[c] -
                                  cache.xhat[i] * inv_rows * sum_dxhat_xhat[c]);
    }
  }
}

void batch_norm_update(std::span<double> running_mean, std::span<double> running_var,
                       std::span<const double> batch_mean, std::span<const double> batch_var,
                       double momentum) {
  require_size(batch_mean.size(), running_mean.size(), "batch mean");
  require_size(batch_var.size(), running_var.size(), "batch variance");
  for (std::size_t c = 0; c < running_mean.size(); ++c) {
    running_mean[c] = momentum * running_mean[c] + (1.0 - momentum) * batch_mean[c];
    running_var[c] = momentum * running_var[c] + (1.0 - momentum) * batch_var[c];
  }
}

void dropout_mask(std::span<double> mask, double rate, std::mt19937_64& rng) {
  require(rate >= 0.0 && rate < 1.0, ErrorCode::kDomainError, "dropout rate must be in [0, 1)");
  const double keep = 1.0 / (1.0 - rate);
  for (double& v : mask) v = util::uniform01(rng) < rate ? 0.0 : keep;
}

double bce_loss(double y_pred, double y_true) {
  const double p = std::clamp(y_pred, kProbClamp, 1.0 - kProbClamp);
  return -(y_true * std::log(p) + (1.0 - y_true) * std::log(1.0 - p));
}

double bce_loss(std::span<const double> y_pred, std::span<const double> y_true) {
  require_size(y_true.size(), y_pred.size(), "labels");
  require(!y_pred.empty(), ErrorCode::kShapeError, "loss over an empty batch");
  double sum = 0.0;
  for (std::size_t i = 0; i < y_pred.size(); ++i) sum += bce_loss(y_pred[i], y_true[i]);
  return sum / static_cast<double>(y_pred.size());
}

double bce_with_logit(double logit, double y_true) {
  // softplus(z) - y z
  const double softplus = std::max(logit, 0.0) + std::log1p(std::exp(-std::abs(logit)));
  return softplus - y_true * logit;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr, std::span<const unsigned char> mask) {
  require_size(grads.size(), params.size(), "adam gradient");
  if (!mask.empty()) require_size(mask.size(), params.size(), "adam mask");
  if (state.m.empty() && state.v.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  require_size(state.m.size(), params.size(), "adam first moment");
  require_size(state.v.size(), params.size(), "adam second moment");

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

}  // namespace djpeg::nn
