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

#include "djpeg/model/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>

#include "djpeg/error.hpp"
#include "djpeg/simd/kernels.hpp"
#include "djpeg/util/bytes.hpp"
#include "djpeg/util/parallel.hpp"
#include "djpeg/util/rng.hpp"
#include "json.hpp"

namespace djpeg::model {

using nn::Mode;
using nn::ParamStore;

namespace {

constexpr std::size_t kSteps = features::kAcCount;
// Gradient accumulation always uses this many partial sums, combined in
// order, so results are independent of the worker count.
constexpr std::size_t kShards = 8;
constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();
constexpr std::uint32_t kCheckpointVersion = 1;

std::size_t lstm_layer_params(std::size_t m, std::size_t n) { return 2 * 4 * (n * (m + n) + n); }

std::size_t projector_channels(const ModelConfig& c) {
  switch (c.projector) {
    case ProjectorKind::kFull:
      return static_cast<std::size_t>(c.C) + (c.use_q_channel ? 2 : 1);
    case ProjectorKind::kSingleConv:
      return 1;
    case ProjectorKind::kNone:
      break;
  }
  return 0;
}

std::size_t layer_input_dim(const ModelConfig& c, int layer) {
  return layer == 0 ? c.encoder_input_dim() : 2 * static_cast<std::size_t>(c.n);
}

// Flat offsets of every parameter group, resolved by name.
struct Layout {
  std::size_t n = 0, bins = 0, m0 = 0, ch = 0;
  std::size_t alpha = kAbsent, beta = kAbsent, gamma = kAbsent;
  std::size_t conv_w = kAbsent, conv_b = kAbsent;
  std::size_t bn_scale = kAbsent, bn_shift = kAbsent, bn_mean = kAbsent, bn_var = kAbsent;
  std::size_t out_w = kAbsent, out_b = kAbsent;
  struct Direction {
    std::size_t W, V, b, m;
  };
  std::vector<std::array<Direction, 2>> lstm;
  std::size_t dense_w = kAbsent, dense_b = kAbsent;
  std::size_t wam_w = kAbsent, wam_b = kAbsent;
  std::size_t head_w = kAbsent, head_b = kAbsent;

  Layout(const ModelConfig& c, const ParamStore& store) {
    n = static_cast<std::size_t>(c.n);
    bins = static_cast<std::size_t>(c.bins());
    m0 = c.encoder_input_dim();
    ch = projector_channels(c);
    auto at = [&](std::string_view name) {
      return store.contains(name) ? store.entries()[store.find(name)].offset : kAbsent;
    };
    alpha = at("proj.alpha");
    beta = at("proj.beta");
    gamma = at("proj.gamma");
    conv_w = at("proj.conv.w");
    conv_b = at("proj.conv.b");
    bn_scale = at("proj.bn.gamma");
    bn_shift = at("proj.bn.beta");
    bn_mean = at("proj.bn.mean");
    bn_var = at("proj.bn.var");
    out_w = at("proj.out.w");
    out_b = at("proj.out.b");
    for (int l = 0; l < c.depth; ++l) {
      std::array<Direction, 2> dirs{};
      for (int d = 0; d < 2; ++d) {
        const std::string prefix = "lstm" + std::to_string(l + 1) + (d ? ".bwd" : ".fwd");
        dirs[d] = {at(prefix + ".W"), at(prefix + ".V"), at(prefix + ".b"),
                   layer_input_dim(c, l)};
      }
      lstm.push_back(dirs);
    }
    dense_w = at("dense.w");
    dense_b = at("dense.b");
    wam_w = at("wam.w");
    wam_b = at("wam.b");
    head_w = at("head.w");
    head_b = at("head.b");
  }

  nn::LstmCellParams cell(const double* flat, int layer, int dir) const {
    const Direction& d = lstm[layer][dir];
    return {n, d.m, flat + d.W, flat + d.V, flat + d.b};
  }
  nn::LstmCellGrads cell_grads(double* g, int layer, int dir) const {
    const Direction& d = lstm[layer][dir];
    return {g + d.W, g + d.V, g + d.b};
  }
};

// Projector input channels of one bin: histogram, optional q, then filters.
void projector_inputs(const ModelConfig& c, const Layout& L, const double* p, double h, double q,
                      double* u) {
  if (c.projector == ProjectorKind::kSingleConv) {
    u[0] = p[L.conv_w] * h + (c.use_q_channel ? p[L.conv_w + 1] * q : 0.0) + p[L.conv_b];
    return;
  }
  std::size_t base = 0;
  u[base++] = h;
  if (c.use_q_channel) u[base++] = q;
  for (int k = 0; k < c.C; ++k) {
    double v = p[L.alpha + k] * h + p[L.gamma + k];
    if (c.use_q_channel) v += p[L.beta + k] * q;
    u[base + k] = v;
  }
}

// ReLU followed by the reduction to one channel.
double projector_output(const ModelConfig& c, const Layout& L, const double* p, const double* y) {
  if (c.projector == ProjectorKind::kSingleConv) return std::max(y[0], 0.0);
  double x = p[L.out_b];
  for (std::size_t k = 0; k < L.ch; ++k) x += p[L.out_w + k] * std::max(y[k], 0.0);
  return x;
}

// Encoder input of one example using running BN statistics (or raw rows).
void encoder_input_infer(const ModelConfig& c, const Layout& L, const double* p,
                         const double* example, double* x) {
  const std::size_t bins = L.bins;
  if (c.projector == ProjectorKind::kNone) {
    for (std::size_t k = 0; k < kSteps; ++k) {
      for (std::size_t i = 0; i < bins; ++i) {
        const double* hq = example + (k * bins + i) * 2;
        x[k * L.m0 + i] = hq[0];
        if (c.use_q_channel) x[k * L.m0 + bins + i] = hq[1];
      }
    }
    return;
  }
  std::vector<double> u(L.ch), y(L.ch);
  std::vector<double> inv_std(L.ch);
  for (std::size_t k = 0; k < L.ch; ++k) {
    inv_std[k] = 1.0 / std::sqrt(p[L.bn_var + k] + nn::kBnEpsilon);
  }
  for (std::size_t r = 0; r < kSteps * bins; ++r) {
    projector_inputs(c, L, p, example[2 * r], example[2 * r + 1], u.data());
    for (std::size_t k = 0; k < L.ch; ++k) {
      y[k] = p[L.bn_scale + k] * (u[k] - p[L.bn_mean + k]) * inv_std[k] + p[L.bn_shift + k];
    }
    x[r] = projector_output(c, L, p, y.data());
  }
}

// Per-example encoder state kept between forward and backward.
struct Workspace {
  std::vector<std::vector<double>> in;   // per layer input, 63 x m_l
  std::vector<std::vector<double>> out;  // per layer output, 63 x 2n
  std::vector<std::array<nn::LstmTrace, 2>> traces;
  std::vector<std::array<std::vector<double>, 2>> x_mask, s_mask;
  std::vector<double> scores, weights, pooled;
  double logit = 0.0;
  // backward scratch
  std::vector<std::vector<double>> d_out;
  std::vector<double> d_in, d_pooled;

  void resize(const ModelConfig& c, const Layout& L) {
    const std::size_t depth = static_cast<std::size_t>(c.depth);
    in.resize(std::max<std::size_t>(depth, 1));
    in[0].resize(kSteps * L.m0);
    out.resize(depth);
    traces.resize(depth);
    x_mask.resize(depth);
    s_mask.resize(depth);
    d_out.resize(depth);
    for (std::size_t l = 0; l < depth; ++l) {
      if (l > 0) in[l].resize(kSteps * 2 * L.n);
      out[l].resize(kSteps * 2 * L.n);
      d_out[l].resize(kSteps * 2 * L.n);
    }
  }
};

// Which earlier outputs feed layer l. Layer 3 (index 2) reads s1 + s2 when
// the residual connection is on.
bool residual_input(const ModelConfig& c, int layer) { return c.residual && layer == 2; }

void draw_masks(const ModelConfig& c, const Layout& L, std::uint64_t seed, Workspace& ws) {
  std::mt19937_64 rng(seed);
  for (int l = 0; l < c.depth; ++l) {
    for (int d = 0; d < 2; ++d) {
      auto& xm = ws.x_mask[l][d];
      auto& sm = ws.s_mask[l][d];
      xm.resize(L.lstm[l][d].m);
      sm.resize(L.n);
      nn::dropout_mask(xm, c.dropout, rng);
      nn::dropout_mask(sm, c.recurrent_dropout, rng);
    }
  }
}

void clear_masks(const ModelConfig& c, Workspace& ws) {
  for (int l = 0; l < c.depth; ++l) {
    for (int d = 0; d < 2; ++d) {
      ws.x_mask[l][d].clear();
      ws.s_mask[l][d].clear();
    }
  }
}

// Runs the encoder, pooling and head over ws.in[0]; returns the logit.
double encode(const ModelConfig& c, const Layout& L, const double* p, Workspace& ws) {
  const auto& k = simd::kernels();
  if (c.depth == 0) {
    ws.logit = p[L.dense_b] + k.dot(p + L.dense_w, ws.in[0].data(), kSteps * L.m0);
    return ws.logit;
  }
  const std::size_t w2 = 2 * L.n;
  for (int l = 0; l < c.depth; ++l) {
    if (l > 0) {
      auto& in = ws.in[l];
      if (residual_input(c, l)) {
        for (std::size_t i = 0; i < in.size(); ++i) in[i] = ws.out[0][i] + ws.out[1][i];
      } else {
        in = ws.out[l - 1];
      }
    }
    for (int d = 0; d < 2; ++d) {
      nn::lstm_forward(L.cell(p, l, d), ws.in[l], kSteps, d == 1, ws.x_mask[l][d],
                       ws.s_mask[l][d], ws.traces[l][d],
                       std::span(ws.out[l]).subspan(d * L.n), w2);
    }
  }

  const std::vector<double>& top = ws.out[c.depth - 1];
  ws.pooled.assign(c.pooled_dim(), 0.0);
  switch (c.pooling) {
    case Pooling::kWam:
      ws.scores.resize(kSteps);
      for (std::size_t t = 0; t < kSteps; ++t) {
        ws.scores[t] = p[L.wam_b] + k.dot(p + L.wam_w, &top[t * w2], w2);
      }
      ws.weights = softmax(ws.scores);
      for (std::size_t t = 0; t < kSteps; ++t) k.axpy(ws.weights[t], &top[t * w2], ws.pooled.data(), w2);
      break;
    case Pooling::kLast:
      std::copy_n(&top[(kSteps - 1) * w2], w2, ws.pooled.begin());
      break;
    case Pooling::kFirst:
      std::copy_n(&top[0], w2, ws.pooled.begin());
      break;
    case Pooling::kAddFirstLast:
      for (std::size_t j = 0; j < w2; ++j) ws.pooled[j] = top[j] + top[(kSteps - 1) * w2 + j];
      break;
    case Pooling::kConcatFirstLast:
      std::copy_n(&top[0], w2, ws.pooled.begin());
      std::copy_n(&top[(kSteps - 1) * w2], w2, ws.pooled.begin() + w2);
      break;
  }
  ws.logit = p[L.head_b] + k.dot(p + L.head_w, ws.pooled.data(), ws.pooled.size());
  return ws.logit;
}

// Backward of encode() given dL/dlogit. Accumulates parameter gradients into
// g and writes dL/d(encoder input) to dx.
void encode_backward(const ModelConfig& c, const Layout& L, const double* p, Workspace& ws,
                     double d_logit, double* g, std::span<double> dx) {
  const auto& k = simd::kernels();
  std::fill(dx.begin(), dx.end(), 0.0);
  if (c.depth == 0) {
    k.axpy(d_logit, ws.in[0].data(), g + L.dense_w, kSteps * L.m0);
    g[L.dense_b] += d_logit;
    k.axpy(d_logit, p + L.dense_w, dx.data(), kSteps * L.m0);
    return;
  }
  const std::size_t w2 = 2 * L.n;
  const std::size_t pooled = ws.pooled.size();
  k.axpy(d_logit, ws.pooled.data(), g + L.head_w, pooled);
  g[L.head_b] += d_logit;
  ws.d_pooled.assign(pooled, 0.0);
  k.axpy(d_logit, p + L.head_w, ws.d_pooled.data(), pooled);

  for (auto& d : ws.d_out) std::fill(d.begin(), d.end(), 0.0);
  std::vector<double>& d_top = ws.d_out[c.depth - 1];
  const std::vector<double>& top = ws.out[c.depth - 1];
  const double* dp = ws.d_pooled.data();
  switch (c.pooling) {
    case Pooling::kWam: {
      // s = sum_t a_t s_t with a = softmax(w.s_t + b).
      std::vector<double> da(kSteps);
      double mean_da = 0.0;
      for (std::size_t t = 0; t < kSteps; ++t) {
        da[t] = k.dot(dp, &top[t * w2], w2);
        mean_da += ws.weights[t] * da[t];
      }
      for (std::size_t t = 0; t < kSteps; ++t) {
        const double d_score = ws.weights[t] * (da[t] - mean_da);
        k.axpy(d_score, &top[t * w2], g + L.wam_w, w2);
        g[L.wam_b] += d_score;
        k.axpy(d_score, p + L.wam_w, &d_top[t * w2], w2);
        k.axpy(ws.weights[t], dp, &d_top[t * w2], w2);
      }
      break;
    }
    case Pooling::kLast:
      k.axpy(1.0, dp, &d_top[(kSteps - 1) * w2], w2);
      break;
    case Pooling::kFirst:
      k.axpy(1.0, dp, &d_top[0], w2);
      break;
    case Pooling::kAddFirstLast:
      k.axpy(1.0, dp, &d_top[0], w2);
      k.axpy(1.0, dp, &d_top[(kSteps - 1) * w2], w2);
      break;
    case Pooling::kConcatFirstLast:
      k.axpy(1.0, dp, &d_top[0], w2);
      k.axpy(1.0, dp + w2, &d_top[(kSteps - 1) * w2], w2);
      break;
  }

  for (int l = c.depth - 1; l >= 0; --l) {
    const std::size_t m = L.lstm[l][0].m;
    ws.d_in.assign(kSteps * m, 0.0);
    for (int d = 0; d < 2; ++d) {
      nn::lstm_backward(L.cell(p, l, d), ws.traces[l][d], d == 1, ws.x_mask[l][d],
                        ws.s_mask[l][d], std::span<const double>(ws.d_out[l]).subspan(d * L.n),
                        w2, L.cell_grads(g, l, d), ws.d_in);
    }
    if (l == 0) {
      std::copy(ws.d_in.begin(), ws.d_in.end(), dx.begin());
    } else if (residual_input(c, l)) {
      k.axpy(1.0, ws.d_in.data(), ws.d_out[0].data(), ws.d_in.size());
      k.axpy(1.0, ws.d_in.data(), ws.d_out[1].data(), ws.d_in.size());
    } else {
      k.axpy(1.0, ws.d_in.data(), ws.d_out[l - 1].data(), ws.d_in.size());
    }
  }
}


// Registers every tensor of `c` (zero-filled) in a fixed order.
ParamStore make_store(const ModelConfig& c) {
  ParamStore s;
  const std::size_t C = static_cast<std::size_t>(c.C);
  const std::size_t ch = projector_channels(c);
  if (c.projector == ProjectorKind::kFull) {
    s.add("proj.alpha", {C});
    if (c.use_q_channel) s.add("proj.beta", {C});
    s.add("proj.gamma", {C});
  } else if (c.projector == ProjectorKind::kSingleConv) {
    s.add("proj.conv.w", {c.use_q_channel ? 2u : 1u});
    s.add("proj.conv.b", {1});
  }
  if (c.projector != ProjectorKind::kNone) {
    s.add("proj.bn.gamma", {ch});
    s.add("proj.bn.beta", {ch});
    s.add("proj.bn.mean", {ch}, false);
    s.add("proj.bn.var", {ch}, false);
  }
  if (c.projector == ProjectorKind::kFull) {
    s.add("proj.out.w", {ch});
    s.add("proj.out.b", {1});
  }
  const std::size_t n = static_cast<std::size_t>(c.n);
  if (c.depth == 0) {
    s.add("dense.w", {kSteps * c.encoder_input_dim()});
    s.add("dense.b", {1});
    return s;
  }
  for (int l = 0; l < c.depth; ++l) {
    for (const char* dir : {"fwd", "bwd"}) {
      const std::string prefix = "lstm" + std::to_string(l + 1) + "." + dir;
      s.add(prefix + ".W", {4 * n, layer_input_dim(c, l)});
      s.add(prefix + ".V", {4 * n, n});
      s.add(prefix + ".b", {4 * n});
    }
  }
  if (c.pooling == Pooling::kWam) {
    s.add("wam.w", {2 * n});
    s.add("wam.b", {1});
  }
  s.add("head.w", {c.pooled_dim()});
  s.add("head.b", {1});
  return s;
}

void initialize(const ModelConfig& c, ParamStore& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t n = static_cast<std::size_t>(c.n);
  const std::size_t in_ch = c.use_q_channel ? 2 : 1;
  for (const auto& e : s.entries()) {
    auto v = s.values(e.name);
    const std::string& name = e.name;
    if (name == "proj.alpha" || name == "proj.beta") {
      nn::glorot_uniform_fill(v, in_ch, static_cast<std::size_t>(c.C), rng);
    } else if (name == "proj.conv.w") {
      nn::glorot_uniform_fill(v, in_ch, 1, rng);
    } else if (name == "proj.out.w") {
      nn::glorot_uniform_fill(v, e.size, 1, rng);
    } else if (name == "proj.bn.gamma" || name == "proj.bn.var") {
      std::fill(v.begin(), v.end(), 1.0);
    } else if (name == "dense.w" || name == "wam.w" || name == "head.w") {
      nn::glorot_uniform_fill(v, e.size, 1, rng);
    } else if (name.ends_with(".W")) {
      nn::glorot_uniform_fill(v, e.shape[1], e.shape[0], rng);
    } else if (name.ends_with(".V")) {
      for (std::size_t gate = 0; gate < 4; ++gate) {
        nn::orthogonal_fill(v.subspan(gate * n * n, n * n), n, rng);
      }
    } else if (name.starts_with("lstm") && name.ends_with(".b")) {
      std::fill_n(v.begin(), n, 1.0);  // forget gate
    }
  }
}

}  // namespace

std::string_view pooling_name(Pooling p) {
  switch (p) {
    case Pooling::kWam:
      return "wam";
    case Pooling::kLast:
      return "last";
    case Pooling::kFirst:
      return "first";
    case Pooling::kAddFirstLast:
      return "add";
    case Pooling::kConcatFirstLast:
      return "concat";
  }
  return "unknown";
}

Pooling parse_pooling(std::string_view name) {
  for (Pooling p : {Pooling::kWam, Pooling::kLast, Pooling::kFirst, Pooling::kAddFirstLast,
                    Pooling::kConcatFirstLast}) {
    if (pooling_name(p) == name) return p;
  }
  fail(ErrorCode::kConfigError, "unknown pooling '" + std::string(name) + "'");
}

std::string_view projector_name(ProjectorKind k) {
  switch (k) {
    case ProjectorKind::kNone:
      return "none";
    case ProjectorKind::kFull:
      return "full";
    case ProjectorKind::kSingleConv:
      return "single";
  }
  return "unknown";
}

ProjectorKind parse_projector(std::string_view name) {
  for (ProjectorKind k : {ProjectorKind::kNone, ProjectorKind::kFull, ProjectorKind::kSingleConv}) {
    if (projector_name(k) == name) return k;
  }
  fail(ErrorCode::kConfigError, "unknown projector '" + std::string(name) + "'");
}

std::size_t ModelConfig::encoder_input_dim() const {
  const std::size_t w = static_cast<std::size_t>(bins());
  if (projector != ProjectorKind::kNone) return w;
  return use_q_channel ? 2 * w : w;
}

std::size_t ModelConfig::pooled_dim() const {
  if (depth == 0) return 0;
  const std::size_t w = 2 * static_cast<std::size_t>(n);
  return pooling == Pooling::kConcatFirstLast ? 2 * w : w;
}

void ModelConfig::validate() const {
  auto check = [](bool ok, const std::string& msg) { require(ok, ErrorCode::kConfigError, msg); };
  check(b >= 1 && b <= 1024, "b must be in [1, 1024]");
  check(n >= 1 && n <= 4096, "n must be in [1, 4096]");
  check(depth >= 0 && depth <= 4, "depth must be in [0, 4]");
  check(projector != ProjectorKind::kFull || (C >= 1 && C <= 1024), "C must be in [1, 1024]");
  check(!residual || depth >= 3, "the residual connection needs depth >= 3");
  check(dropout >= 0.0 && dropout < 1.0, "dropout must be in [0, 1)");
  check(recurrent_dropout >= 0.0 && recurrent_dropout < 1.0,
        "recurrent dropout must be in [0, 1)");
}

ModelConfig ModelConfig::preset(int id) {
  require(id >= 1 && id <= 17, ErrorCode::kConfigError,
          "model presets are numbered 1 to 17, got " + std::to_string(id));
  ModelConfig c;
  // Odd ids up to 9 and ids 14, 16 are histogram-only without a projector.
  const bool hist_only = (id <= 9 && id % 2 == 1) || id == 14 || id == 16;
  c.use_q_channel = !hist_only;
  c.projector = hist_only ? ProjectorKind::kNone : ProjectorKind::kFull;
  if (id <= 2) {
    c.depth = 0;
  } else if (id <= 4) {
    c.depth = 1;
  } else if (id <= 6) {
    c.depth = 2;
  } else if (id <= 13) {
    c.depth = 3;
  } else {
    c.depth = 4;
  }
  c.residual = (id >= 9 && id <= 13) || id >= 16;
  if (id == 11) c.projector = ProjectorKind::kSingleConv;
  if (id == 12) c.C = 8;
  if (id == 13) c.C = 32;
  return c;
}

std::string config_to_json(const ModelConfig& c) {
  nlohmann::json j;
  j["b"] = c.b;
  j["n"] = c.n;
  j["C"] = c.C;
  j["depth"] = c.depth;
  j["residual"] = c.residual;
  j["pooling"] = pooling_name(c.pooling);
  j["order"] = features::order_name(c.order);
  j["use_q_channel"] = c.use_q_channel;
  j["projector"] = projector_name(c.projector);
  j["dropout"] = c.dropout;
  j["recurrent_dropout"] = c.recurrent_dropout;
  return j.dump();
}

ModelConfig config_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormatError, std::string("model config is not valid JSON: ") + e.what());
  }
  require(j.is_object(), ErrorCode::kFormatError, "model config must be a JSON object");
  ModelConfig c;
  try {
    c.b = j.value("b", c.b);
    c.n = j.value("n", c.n);
    c.C = j.value("C", c.C);
    c.depth = j.value("depth", c.depth);
    c.residual = j.value("residual", c.residual);
    if (j.contains("pooling")) c.pooling = parse_pooling(j["pooling"].get<std::string>());
    if (j.contains("order")) c.order = features::parse_order(j["order"].get<std::string>());
    c.use_q_channel = j.value("use_q_channel", c.use_q_channel);
    if (j.contains("projector")) c.projector = parse_projector(j["projector"].get<std::string>());
    c.dropout = j.value("dropout", c.dropout);
    c.recurrent_dropout = j.value("recurrent_dropout", c.recurrent_dropout);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormatError, std::string("bad model config field: ") + e.what());
  }
  c.validate();
  return c;
}

ParamCount count_params(const ModelConfig& c) {
  c.validate();
  ParamCount out;
  const std::size_t C = static_cast<std::size_t>(c.C);
  const std::size_t n = static_cast<std::size_t>(c.n);
  const std::size_t in_ch = c.use_q_channel ? 2 : 1;
  const std::size_t ch = projector_channels(c);
  switch (c.projector) {
    case ProjectorKind::kFull:
      // filters, BN scale/shift, 1x1 reduction with bias
      out.trainable += C * (in_ch + 1) + 2 * ch + ch + 1;
      out.non_trainable += 2 * ch;
      break;
    case ProjectorKind::kSingleConv:
      out.trainable += in_ch + 1 + 2;
      out.non_trainable += 2;
      break;
    case ProjectorKind::kNone:
      break;
  }
  if (c.depth == 0) {
    out.trainable += kSteps * c.encoder_input_dim() + 1;
    return out;
  }
  for (int l = 0; l < c.depth; ++l) out.trainable += lstm_layer_params(layer_input_dim(c, l), n);
  if (c.pooling == Pooling::kWam) out.trainable += 2 * n + 1;
  out.trainable += c.pooled_dim() + 1;
  return out;
}

std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> out(scores.size());
  if (scores.empty()) return out;
  const double top = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) sum += out[i] = std::exp(scores[i] - top);
  for (double& v : out) v /= sum;
  return out;
}

Model::Model(ModelConfig config, nn::ParamStore params)
    : config_(std::move(config)), params_(std::move(params)) {}

Model Model::build(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  ParamStore store = make_store(config);
  initialize(config, store, seed);
  return Model(config, std::move(store));
}

std::size_t Model::input_size() const {
  return kSteps * static_cast<std::size_t>(config_.bins()) * 2;
}

std::vector<double> Model::predict(std::span<const double> inputs, int threads) const {
  const std::size_t per = input_size();
  require(inputs.size() % per == 0, ErrorCode::kShapeError,
          "input length " + std::to_string(inputs.size()) + " is not a multiple of " +
              std::to_string(per));
  const std::size_t count = inputs.size() / per;
  std::vector<double> probs(count);
  if (count == 0) return probs;
  const Layout L(config_, params_);
  const double* p = params_.flat().data();
  const std::size_t blocks = std::min<std::size_t>(count, util::resolve_threads(threads));
  util::parallel_for(blocks, threads, [&](std::size_t blk) {
    Workspace ws;
    ws.resize(config_, L);
    clear_masks(config_, ws);
    for (std::size_t i = blk; i < count; i += blocks) {
      encoder_input_infer(config_, L, p, inputs.data() + i * per, ws.in[0].data());
      probs[i] = nn::sigmoid(encode(config_, L, p, ws));
    }
  });
  return probs;
}

Model::Trace Model::trace(std::span<const double> example) const {
  require(example.size() == input_size(), ErrorCode::kShapeError,
          "example has " + std::to_string(example.size()) + " values, expected " +
              std::to_string(input_size()));
  const Layout L(config_, params_);
  const double* p = params_.flat().data();
  Workspace ws;
  ws.resize(config_, L);
  clear_masks(config_, ws);
  encoder_input_infer(config_, L, p, example.data(), ws.in[0].data());
  Trace t;
  t.logit = encode(config_, L, p, ws);
  t.prob = nn::sigmoid(t.logit);
  t.x = ws.in[0];
  t.layers = ws.out;
  if (config_.depth > 0 && config_.pooling == Pooling::kWam) t.pool_weights = ws.weights;
  t.pooled = ws.pooled;
  return t;
}

Model::Gradients Model::forward_backward(std::span<const double> inputs,
                                         std::span<const double> labels,
                                         std::uint64_t dropout_seed, bool dropout,
                                         int threads) const {
  const std::size_t per = input_size();
  const std::size_t batch = labels.size();
  require(batch > 0 && inputs.size() == batch * per, ErrorCode::kShapeError,
          "batch of " + std::to_string(batch) + " labels needs " + std::to_string(batch * per) +
              " input values, got " + std::to_string(inputs.size()));
  const ModelConfig& c = config_;
  const Layout L(c, params_);
  const double* p = params_.flat().data();
  const std::size_t m0 = L.m0;
  const std::size_t rows = batch * kSteps * L.bins;

  Gradients out;
  out.grads.assign(params_.size(), 0.0);
  out.probs.resize(batch);
  double* g = out.grads.data();

  // Projector forward over the whole batch (BN uses batch statistics).
  std::vector<double> X(batch * kSteps * m0);
  std::vector<double> U, Y;
  nn::BatchNormCache cache;
  if (c.projector == ProjectorKind::kNone) {
    for (std::size_t j = 0; j < batch; ++j) {
      encoder_input_infer(c, L, p, inputs.data() + j * per, X.data() + j * kSteps * m0);
    }
  } else {
    U.resize(rows * L.ch);
    Y.resize(rows * L.ch);
    for (std::size_t r = 0; r < rows; ++r) {
      projector_inputs(c, L, p, inputs[2 * r], inputs[2 * r + 1], &U[r * L.ch]);
    }
    nn::batch_norm_forward(U, rows, L.ch, std::span(p + L.bn_scale, L.ch),
                           std::span(p + L.bn_shift, L.ch), std::span(p + L.bn_mean, L.ch),
                           std::span(p + L.bn_var, L.ch), Mode::kTrain, Y, cache);
    for (std::size_t r = 0; r < rows; ++r) X[r] = projector_output(c, L, p, &Y[r * L.ch]);
    out.bn_mean = cache.mean;
    out.bn_var = cache.var;
  }

  // Encoder forward and backward per example, partial sums per shard.
  std::vector<double> dX(X.size());
  std::vector<double> losses(batch);
  std::vector<std::vector<double>> shard_grads(kShards);
  const double inv_batch = 1.0 / static_cast<double>(batch);
  util::parallel_for(kShards, threads, [&](std::size_t s) {
    if (s >= batch) return;
    shard_grads[s].assign(params_.size(), 0.0);
    Workspace ws;
    ws.resize(c, L);
    for (std::size_t j = s; j < batch; j += kShards) {
      std::copy_n(X.data() + j * kSteps * m0, kSteps * m0, ws.in[0].data());
      if (dropout) {
        draw_masks(c, L, util::derive_seed(dropout_seed, j), ws);
      } else {
        clear_masks(c, ws);
      }
      const double logit = encode(c, L, p, ws);
      const double prob = nn::sigmoid(logit);
      out.probs[j] = prob;
      losses[j] = nn::bce_with_logit(logit, labels[j]);
      encode_backward(c, L, p, ws, (prob - labels[j]) * inv_batch, shard_grads[s].data(),
                      std::span(dX).subspan(j * kSteps * m0, kSteps * m0));
    }
  });
  for (const auto& sg : shard_grads) {
    if (!sg.empty()) simd::kernels().axpy(1.0, sg.data(), g, sg.size());
  }
  for (double l : losses) out.loss += l;
  out.loss *= inv_batch;
  require(std::isfinite(out.loss), ErrorCode::kNumericError, "training loss is not finite");

  if (c.projector == ProjectorKind::kNone) return out;

  // Projector backward: ReLU and reduction into U (as dY), BN into Y (as dU).
  const bool full = c.projector == ProjectorKind::kFull;
  for (std::size_t r = 0; r < rows; ++r) {
    const double dx = dX[r];
    if (full) g[L.out_b] += dx;
    for (std::size_t k = 0; k < L.ch; ++k) {
      const double y = Y[r * L.ch + k];
      if (full) g[L.out_w + k] += dx * std::max(y, 0.0);
      U[r * L.ch + k] = y > 0.0 ? (full ? dx * p[L.out_w + k] : dx) : 0.0;
    }
  }
  nn::batch_norm_backward(cache, std::span(p + L.bn_scale, L.ch), U, Y,
                          std::span(g + L.bn_scale, L.ch), std::span(g + L.bn_shift, L.ch));
  const std::size_t base = c.use_q_channel ? 2 : 1;
  for (std::size_t r = 0; r < rows; ++r) {
    const double h = inputs[2 * r], q = inputs[2 * r + 1];
    const double* du = &Y[r * L.ch];
    if (full) {
      for (int k = 0; k < c.C; ++k) {
        const double d = du[base + k];
        g[L.alpha + k] += d * h;
        if (c.use_q_channel) g[L.beta + k] += d * q;
        g[L.gamma + k] += d;
      }
    } else {
      g[L.conv_w] += du[0] * h;
      if (c.use_q_channel) g[L.conv_w + 1] += du[0] * q;
      g[L.conv_b] += du[0];
    }
  }
  return out;
}

void Model::update_running_stats(const Gradients& g) {
  if (config_.projector == ProjectorKind::kNone) return;
  nn::batch_norm_update(params_.values("proj.bn.mean"), params_.values("proj.bn.var"),
                        g.bn_mean, g.bn_var);
}

std::vector<std::uint8_t> encode_checkpoint(const Model& model) {
  std::vector<std::uint8_t> out = {'D', 'J', 'P', 'M'};
  util::put_le(out, kCheckpointVersion, 4);
  const std::string cfg = config_to_json(model.config());
  util::put_le(out, cfg.size(), 4);
  util::put_bytes(out, cfg);
  const auto& store = model.params();
  util::put_le(out, store.entries().size(), 4);
  for (const auto& e : store.entries()) {
    util::put_le(out, e.name.size(), 4);
    util::put_bytes(out, e.name);
    util::put_le(out, e.shape.size(), 4);
    for (auto d : e.shape) util::put_le(out, d, 8);
    for (double v : store.values(e.name)) util::put_f64(out, v);
  }
  return out;
}

Model decode_checkpoint(std::span<const std::uint8_t> bytes) {
  require(bytes.size() >= 4 && std::memcmp(bytes.data(), "DJPM", 4) == 0,
          ErrorCode::kFormatError, "not a DJPM checkpoint");
  util::ByteReader in(bytes.subspan(4), "checkpoint");
  const auto version = in.get(4);
  require(version == kCheckpointVersion, ErrorCode::kFormatError,
          "unsupported checkpoint version " + std::to_string(version));
  const ModelConfig config = config_from_json(in.get_string(in.get(4)));
  Model model = Model::build(config, 0);
  auto& store = model.params();
  const auto count = in.get(4);
  require(count == store.entries().size(), ErrorCode::kConfigError,
          "checkpoint holds " + std::to_string(count) + " tensors, the config needs " +
              std::to_string(store.entries().size()));
  std::vector<bool> seen(count, false);
  for (std::uint64_t t = 0; t < count; ++t) {
    const std::string name = in.get_string(in.get(4));
    require(store.contains(name), ErrorCode::kConfigError,
            "checkpoint tensor '" + name + "' does not belong to this config");
    const std::size_t idx = store.find(name);
    require(!seen[idx], ErrorCode::kFormatError, "duplicate checkpoint tensor '" + name + "'");
    seen[idx] = true;
    nn::Shape shape(in.get(4));
    require(shape.size() <= 8, ErrorCode::kFormatError, "tensor rank too large");
    for (auto& d : shape) d = in.get(8);
    require(shape == store.entries()[idx].shape, ErrorCode::kConfigError,
            "tensor '" + name + "' has shape " + nn::shape_string(shape) + ", expected " +
                nn::shape_string(store.entries()[idx].shape));
    for (double& v : store.values(idx)) v = in.get_f64();
  }
  require(in.done(), ErrorCode::kFormatError, "trailing bytes after checkpoint");
  nn::check_finite(store.flat(), "checkpoint parameters");
  return model;
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(model);
  std::ofstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorCode::kIoError, "cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(f), ErrorCode::kIoError, "failed writing " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorCode::kIoError, "cannot read " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace djpeg::model
