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

// Building blocks of the detector network: initializers, the LSTM cell and
// its sequence-level forward/backward passes, batch normalization, the
// per-bin affine projection, dropout, the loss and the Adam optimizer.

#ifndef DJPEG_NN_OPS_HPP_
#define DJPEG_NN_OPS_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "djpeg/nn/tensor.hpp"

namespace djpeg::nn {

inline constexpr double kBnEpsilon = 1e-3;
inline constexpr double kBnMomentum = 0.99;
inline constexpr double kProbClamp = 1e-7;

// Uniform on [-L, L] with L = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out,
                      std::mt19937_64& rng);
void glorot_uniform_fill(std::span<double> out, std::size_t fan_in, std::size_t fan_out,
                         std::mt19937_64& rng);

// Q factor of the QR decomposition of a standard normal matrix, with column
// signs fixed so that R has a positive diagonal.
Tensor orthogonal_init(std::size_t n, std::mt19937_64& rng);
void orthogonal_fill(std::span<double> out, std::size_t n, std::mt19937_64& rng);

double sigmoid(double x);

// Views of one LSTM direction. Gate blocks are stacked row-wise in the order
// forget, input, output, candidate: W is 4n x m, V is 4n x n, b is 4n.
struct LstmCellParams {
  std::size_t n = 0;
  std::size_t m = 0;
  const double* W = nullptr;
  const double* V = nullptr;
  const double* b = nullptr;
};

struct LstmCellGrads {
  double* W = nullptr;
  double* V = nullptr;
  double* b = nullptr;
};

struct LstmState {
  std::vector<double> s;
  std::vector<double> c;
};

// One step. Empty masks mean no dropout; otherwise x_mask scales x in all
// four input products and s_mask scales s_prev in all four recurrent ones.
// ShapeError on inconsistent sizes.
LstmState lstm_cell(std::span<const double> x, std::span<const double> s_prev,
                    std::span<const double> c_prev, const LstmCellParams& p,
                    std::span<const double> x_mask = {},
                    std::span<const double> s_mask = {});

// Activations of one direction over a whole sequence, kept for backward.
struct LstmTrace {
  std::size_t steps = 0;
  std::vector<double> x;      // steps x m, masked input in processing order
  std::vector<double> s_in;   // steps x n, masked previous state
  std::vector<double> gates;  // steps x 4n, activated f, i, o, c~
  std::vector<double> c;      // (steps + 1) x n, c[0] = 0
  std::vector<double> tanh_c; // steps x n
};

// Runs one direction over xs (steps x m, natural order) and writes the
// state for natural position t to out[t]; `reverse` processes t = T-1..0.
void lstm_forward(const LstmCellParams& p, std::span<const double> xs, std::size_t steps,
                  bool reverse, std::span<const double> x_mask,
                  std::span<const double> s_mask, LstmTrace& trace, std::span<double> out,
                  std::size_t out_stride);

// Backpropagation through time. d_out holds dL/ds for natural position t at
// d_out[t * out_stride]. Parameter gradients are accumulated into g; dL/dx
// is accumulated into dxs (steps x m, natural order).
void lstm_backward(const LstmCellParams& p, const LstmTrace& trace, bool reverse,
                   std::span<const double> x_mask, std::span<const double> s_mask,
                   std::span<const double> d_out, std::size_t out_stride,
                   const LstmCellGrads& g, std::span<double> dxs);

// output_c = alpha_c * h + beta_c * q + gamma_c.
std::vector<double> per_bin_affine(double h, double q, std::span<const double> alpha,
                                   std::span<const double> beta,
                                   std::span<const double> gamma);

// Batch normalization over rows x channels data (rows = batch x positions).
struct BatchNormCache {
  std::size_t rows = 0;
  std::size_t channels = 0;
  std::vector<double> xhat;     // rows x channels
  std::vector<double> inv_std;  // per channel
  std::vector<double> mean;     // batch statistics (train mode)
  std::vector<double> var;      // biased variance
};

enum class Mode { kTrain, kInfer };

void batch_norm_forward(std::span<const double> x, std::size_t rows, std::size_t channels,
                        std::span<const double> scale, std::span<const double> shift,
                        std::span<const double> running_mean,
                        std::span<const double> running_var, Mode mode,
                        std::span<double> y, BatchNormCache& cache);

// Train-mode backward; accumulates into d_scale and d_shift.
void batch_norm_backward(const BatchNormCache& cache, std::span<const double> scale,
                         std::span<const double> dy, std::span<double> dx,
                         std::span<double> d_scale, std::span<double> d_shift);

// running = momentum * running + (1 - momentum) * batch.
void batch_norm_update(std::span<double> running_mean, std::span<double> running_var,
                       std::span<const double> batch_mean, std::span<const double> batch_var,
                       double momentum = kBnMomentum);

// Inverted dropout: each entry is 0 with probability `rate`, else 1/(1-rate).
void dropout_mask(std::span<double> mask, double rate, std::mt19937_64& rng);

// Mean binary cross-entropy with predictions clamped to [1e-7, 1 - 1e-7].
double bce_loss(std::span<const double> y_pred, std::span<const double> y_true);
double bce_loss(double y_pred, double y_true);
// Cross-entropy of sigmoid(logit), computed stably; d/dlogit = p - y.
double bce_with_logit(double logit, double y_true);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  std::int64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;
};

// Bias-corrected Adam. Entries with mask 0 are left untouched. ShapeError
// when sizes disagree.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr, std::span<const unsigned char> mask = {});

}  // namespace djpeg::nn

#endif  // DJPEG_NN_OPS_HPP_
