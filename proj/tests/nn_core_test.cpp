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

#include <cmath>
#include <random>

#include "djpeg/error.hpp"
#include "djpeg/nn/ops.hpp"
#include "djpeg/simd/kernels.hpp"
#include "doctest.h"

using namespace djpeg::nn;
using djpeg::Error;

namespace {

struct Weights {
  std::size_t n, m;
  std::vector<double> W, V, b;
  LstmCellParams view() const { return {n, m, W.data(), V.data(), b.data()}; }
};

Weights random_weights(std::size_t n, std::size_t m, std::mt19937_64& rng, double scale = 0.5) {
  std::normal_distribution<double> g(0.0, scale);
  Weights w{n, m, std::vector<double>(4 * n * m), std::vector<double>(4 * n * n),
            std::vector<double>(4 * n)};
  for (auto* v : {&w.W, &w.V, &w.b}) {
    for (double& x : *v) x = g(rng);
  }
  return w;
}

std::vector<double> random_vec(std::size_t k, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(k);
  for (double& x : v) x = g(rng);
  return v;
}

// Textbook cell with gates computed one row at a time, independent of the
// fused kernels.
LstmState naive_cell(const std::vector<double>& x, const std::vector<double>& s,
                     const std::vector<double>& c, const Weights& w) {
  const std::size_t n = w.n, m = w.m;
  auto pre = [&](std::size_t gate, std::size_t j) {
    const std::size_t row = gate * n + j;
    double z = w.b[row];
    for (std::size_t k = 0; k < m; ++k) z += w.W[row * m + k] * x[k];
    for (std::size_t k = 0; k < n; ++k) z += w.V[row * n + k] * s[k];
    return z;
  };
  LstmState out{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t j = 0; j < n; ++j) {
    const double f = 1.0 / (1.0 + std::exp(-pre(0, j)));
    const double i = 1.0 / (1.0 + std::exp(-pre(1, j)));
    const double o = 1.0 / (1.0 + std::exp(-pre(2, j)));
    const double g = std::tanh(pre(3, j));
    out.c[j] = f * c[j] + i * g;
    out.s[j] = o * std::tanh(out.c[j]);
  }
  return out;
}

// Sum of w_t . s_t over a sequence run through one direction.
double sequence_objective(const Weights& w, const std::vector<double>& xs, std::size_t steps,
                          bool reverse, const std::vector<double>& mx,
                          const std::vector<double>& ms, const std::vector<double>& probe) {
  LstmTrace trace;
  std::vector<double> out(steps * w.n);
  lstm_forward(w.view(), xs, steps, reverse, mx, ms, trace, out, w.n);
  double sum = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) sum += out[i] * probe[i];
  return sum;
}

}  // namespace

TEST_CASE("glorot and orthogonal initializers") {
  std::mt19937_64 rng(3);
  const Tensor g = glorot_uniform({128, 20}, 20, 128, rng);
  const double limit = std::sqrt(6.0 / 148.0);
  double max_abs = 0.0, mean = 0.0;
  for (double v : g.data) {
    max_abs = std::max(max_abs, std::abs(v));
    mean += v;
  }
  CHECK(max_abs <= limit);
  CHECK(max_abs > 0.95 * limit);
  CHECK(std::abs(mean / g.size()) < 0.02);

  for (std::size_t n : {1u, 4u, 33u}) {
    const Tensor q = orthogonal_init(n, rng);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        double dot = 0.0;
        for (std::size_t r = 0; r < n; ++r) dot += q.data[r * n + a] * q.data[r * n + b];
        CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("lstm_cell examples") {
  // All-zero weights: every sigmoid gate is 1/2 and the candidate is 0.
  Weights w{2, 3, std::vector<double>(24), std::vector<double>(16), std::vector<double>(8)};
  const LstmState st = lstm_cell(std::vector<double>{1, 2, 3}, std::vector<double>{0.3, -0.4},
                                 std::vector<double>{1.0, -2.0}, w.view());
  CHECK(st.c[0] == doctest::Approx(0.5));
  CHECK(st.c[1] == doctest::Approx(-1.0));
  CHECK(st.s[0] == doctest::Approx(0.5 * std::tanh(0.5)));
  CHECK(st.s[1] == doctest::Approx(0.5 * std::tanh(-1.0)));

  CHECK_THROWS_AS(lstm_cell(std::vector<double>{1, 2}, std::vector<double>{0, 0},
                            std::vector<double>{0, 0}, w.view()),
                  Error);
}

TEST_CASE("lstm_cell matches the naive oracle, with and without masks") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + trial % 7, m = 1 + trial % 5;
    const Weights w = random_weights(n, m, rng);
    auto x = random_vec(m, rng), s = random_vec(n, rng), c = random_vec(n, rng);
    std::vector<double> mx(m), ms(n);
    dropout_mask(mx, 0.3, rng);
    dropout_mask(ms, 0.3, rng);

    const LstmState got = lstm_cell(x, s, c, w.view());
    const LstmState want = naive_cell(x, s, c, w);
    const LstmState got_masked = lstm_cell(x, s, c, w.view(), mx, ms);
    for (std::size_t k = 0; k < m; ++k) x[k] *= mx[k];
    for (std::size_t k = 0; k < n; ++k) s[k] *= ms[k];
    const LstmState want_masked = naive_cell(x, s, c, w);
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(got.s[j] == doctest::Approx(want.s[j]).epsilon(1e-12));
      CHECK(got.c[j] == doctest::Approx(want.c[j]).epsilon(1e-12));
      CHECK(got_masked.s[j] == doctest::Approx(want_masked.s[j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("lstm_forward equals repeated cells in either direction") {
  std::mt19937_64 rng(5);
  const std::size_t n = 5, m = 3, steps = 9;
  const Weights w = random_weights(n, m, rng);
  const auto xs = random_vec(steps * m, rng);
  for (bool reverse : {false, true}) {
    LstmTrace trace;
    std::vector<double> out(steps * 2 * n, -7.0);
    lstm_forward(w.view(), xs, steps, reverse, {}, {}, trace, out, 2 * n);
    std::vector<double> s(n, 0.0), c(n, 0.0);
    for (std::size_t k = 0; k < steps; ++k) {
      const std::size_t t = reverse ? steps - 1 - k : k;
      const std::vector<double> x(xs.begin() + t * m, xs.begin() + (t + 1) * m);
      const LstmState st = naive_cell(x, s, c, w);
      s = st.s;
      c = st.c;
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(out[t * 2 * n + j] == doctest::Approx(s[j]).epsilon(1e-12));
        CHECK(out[t * 2 * n + n + j] == -7.0);  // stride gap untouched
      }
    }
  }
}

TEST_CASE("lstm_backward matches finite differences") {
  std::mt19937_64 rng(17);
  const std::size_t n = 3, m = 2, steps = 6;
  for (bool reverse : {false, true}) {
    for (bool masked : {false, true}) {
      Weights w = random_weights(n, m, rng, 0.7);
      auto xs = random_vec(steps * m, rng);
      const auto probe = random_vec(steps * n, rng);
      std::vector<double> mx, ms;
      if (masked) {
        mx.resize(m);
        ms.resize(n);
        dropout_mask(mx, 0.25, rng);
        dropout_mask(ms, 0.25, rng);
      }

      LstmTrace trace;
      std::vector<double> out(steps * n);
      lstm_forward(w.view(), xs, steps, reverse, mx, ms, trace, out, n);
      std::vector<double> dW(w.W.size()), dV(w.V.size()), db(w.b.size()), dxs(xs.size());
      lstm_backward(w.view(), trace, reverse, mx, ms, probe, n,
                    {dW.data(), dV.data(), db.data()}, dxs);

      const double h = 1e-6;
      auto check = [&](std::vector<double>& values, const std::vector<double>& grad) {
        for (std::size_t i = 0; i < values.size(); ++i) {
          const double keep = values[i];
          values[i] = keep + h;
          const double up = sequence_objective(w, xs, steps, reverse, mx, ms, probe);
          values[i] = keep - h;
          const double down = sequence_objective(w, xs, steps, reverse, mx, ms, probe);
          values[i] = keep;
          CHECK(grad[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-6).scale(1.0));
        }
      };
      check(w.W, dW);
      check(w.V, dV);
      check(w.b, db);
      check(xs, dxs);
    }
  }
}

TEST_CASE("lstm_forward agrees across SIMD variants") {
  std::mt19937_64 rng(23);
  const std::size_t n = 13, m = 42, steps = 11;
  const Weights w = random_weights(n, m, rng, 0.2);
  const auto xs = random_vec(steps * m, rng);
  const auto original = djpeg::simd::kernels().isa;
  std::vector<double> ref;
  for (auto isa : {djpeg::simd::Isa::kScalar, djpeg::simd::Isa::kAvx2, djpeg::simd::Isa::kNeon}) {
    if (!djpeg::simd::isa_available(isa)) continue;
    djpeg::simd::set_active_isa(isa);
    LstmTrace trace;
    std::vector<double> out(steps * n);
    lstm_forward(w.view(), xs, steps, true, {}, {}, trace, out, n);
    if (ref.empty()) {
      ref = out;
    } else {
      for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    }
  }
  djpeg::simd::set_active_isa(original);
}

TEST_CASE("per_bin_affine example") {
  const std::vector<double> alpha{1, 0, 2}, beta{0, 1, -1}, gamma{0.5, 0, 3};
  const auto out = per_bin_affine(4.0, 10.0, alpha, beta, gamma);
  CHECK(out == std::vector<double>{4.5, 10.0, 1.0});
  CHECK_THROWS_AS(per_bin_affine(1, 1, alpha, beta, std::vector<double>{1}), Error);
}

TEST_CASE("batch norm forward, running statistics and gradient") {
  // Two channels over four rows.
  const std::vector<double> x{1, 10, 2, 20, 3, 30, 4, 40};
  const std::vector<double> scale{1, 2}, shift{0, 1}, rm{0, 0}, rv{1, 1};
  std::vector<double> y(8);
  BatchNormCache cache;
  batch_norm_forward(x, 4, 2, scale, shift, rm, rv, Mode::kTrain, y, cache);
  CHECK(cache.mean[0] == doctest::Approx(2.5));
  CHECK(cache.var[0] == doctest::Approx(1.25));
  CHECK(cache.var[1] == doctest::Approx(125.0));
  double m0 = 0, v0 = 0;
  for (int r = 0; r < 4; ++r) m0 += y[r * 2];
  for (int r = 0; r < 4; ++r) v0 += y[r * 2] * y[r * 2];
  CHECK(m0 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(v0 / 4 == doctest::Approx(1.25 / (1.25 + kBnEpsilon)));

  std::vector<double> mean{0, 0}, var{1, 1};
  batch_norm_update(mean, var, cache.mean, cache.var);
  CHECK(mean[0] == doctest::Approx(0.025));
  CHECK(var[1] == doctest::Approx(0.99 + 1.25));

  batch_norm_forward(x, 4, 2, scale, shift, std::vector<double>{1, 1},
                     std::vector<double>{4, 4}, Mode::kInfer, y, cache);
  CHECK(y[0] == doctest::Approx(0.0));
  CHECK(y[3] == doctest::Approx(2 * 19 / std::sqrt(4 + kBnEpsilon) + 1));

  // Finite-difference check of train-mode backward on sum(probe * y).
  std::mt19937_64 rng(2);
  auto xs = random_vec(15, rng);
  const auto probe = random_vec(15, rng);
  std::vector<double> sc{0.7, -1.2, 2.0}, sh{0.1, 0.2, 0.3};
  auto objective = [&] {
    std::vector<double> out(15);
    BatchNormCache c;
    batch_norm_forward(xs, 5, 3, sc, sh, std::vector<double>(3), std::vector<double>(3, 1.0),
                       Mode::kTrain, out, c);
    double s = 0;
    for (int i = 0; i < 15; ++i) s += out[i] * probe[i];
    return s;
  };
  std::vector<double> out(15), dx(15), dsc(3), dsh(3);
  batch_norm_forward(xs, 5, 3, sc, sh, std::vector<double>(3), std::vector<double>(3, 1.0),
                     Mode::kTrain, out, cache);
  batch_norm_backward(cache, sc, probe, dx, dsc, dsh);
  const double h = 1e-6;
  auto fd = [&](std::vector<double>& v, std::size_t i) {
    const double keep = v[i];
    v[i] = keep + h;
    const double up = objective();
    v[i] = keep - h;
    const double down = objective();
    v[i] = keep;
    return (up - down) / (2 * h);
  };
  for (std::size_t i = 0; i < 15; ++i) CHECK(dx[i] == doctest::Approx(fd(xs, i)).epsilon(1e-6));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(dsc[i] == doctest::Approx(fd(sc, i)).epsilon(1e-6));
    CHECK(dsh[i] == doctest::Approx(fd(sh, i)).epsilon(1e-6));
  }
}

TEST_CASE("dropout masks") {
  std::mt19937_64 rng(9);
  std::vector<double> mask(100000);
  dropout_mask(mask, 0.1, rng);
  std::size_t zeros = 0;
  double mean = 0;
  for (double v : mask) {
    zeros += v == 0.0;
    CHECK((v == 0.0 || v == doctest::Approx(1.0 / 0.9)));
    mean += v;
  }
  CHECK(std::abs(static_cast<double>(zeros) / mask.size() - 0.1) < 0.005);
  CHECK(mean / mask.size() == doctest::Approx(1.0).epsilon(0.01));
  dropout_mask(mask, 0.0, rng);
  for (double v : mask) CHECK(v == 1.0);
  CHECK_THROWS_AS(dropout_mask(mask, 1.0, rng), Error);
}

TEST_CASE("binary cross-entropy") {
  CHECK(bce_loss(0.5, 1.0) == doctest::Approx(std::log(2.0)));
  CHECK(bce_loss(1.0, 0.0) == doctest::Approx(-std::log(kProbClamp)));
  CHECK(std::isfinite(bce_loss(0.0, 1.0)));
  const std::vector<double> p{0.9, 0.2}, y{1, 0};
  CHECK(bce_loss(p, y) == doctest::Approx(-(std::log(0.9) + std::log(0.8)) / 2));
  for (double z : {-30.0, -2.0, 0.0, 0.3, 5.0}) {
    for (double t : {0.0, 1.0}) {
      if (std::abs(z) < 10) CHECK(bce_with_logit(z, t) == doctest::Approx(bce_loss(sigmoid(z), t)));
      CHECK(std::isfinite(bce_with_logit(z, t)));
    }
  }
  CHECK(bce_with_logit(-800.0, 1.0) == doctest::Approx(800.0));
}

TEST_CASE("adam first step moves each parameter by about lr") {
  std::vector<double> params{1.0, -2.0, 3.0, 0.5};
  const std::vector<double> grads{0.3, -4.0, 1e-3, 7.0};
  const std::vector<unsigned char> mask{1, 1, 1, 0};
  AdamState state;
  adam_step(params, grads, state, 1e-3, mask);
  CHECK(state.step == 1);
  CHECK(params[0] == doctest::Approx(1.0 - 1e-3).epsilon(1e-9));
  CHECK(params[1] == doctest::Approx(-2.0 + 1e-3).epsilon(1e-9));
  CHECK(params[2] == doctest::Approx(3.0 - 1e-3).epsilon(1e-6));
  CHECK(params[3] == 0.5);

  // Second step with the same gradient is again about lr.
  adam_step(params, grads, state, 1e-3, mask);
  CHECK(params[0] == doctest::Approx(1.0 - 2e-3).epsilon(1e-9));
  CHECK_THROWS_AS(adam_step(params, std::vector<double>{1.0}, state, 1e-3), Error);
}
