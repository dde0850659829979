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

// Project acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails. Pass criterion numbers as arguments to run a
// subset, e.g. `acceptance_test 1 2 7`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "djpeg/data/dataset.hpp"
#include "djpeg/error.hpp"
#include "djpeg/jpeg/codec.hpp"
#include "djpeg/model/model.hpp"
#include "djpeg/quant/quant_model.hpp"
#include "djpeg/train/metrics.hpp"
#include "djpeg/train/train.hpp"
#include "djpeg/util/parallel.hpp"
#include "libjpeg_oracle.hpp"
#include "test_util.hpp"

using namespace djpeg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---- 1 ---------------------------------------------------------------------

Outcome parameter_counts() {
  const std::map<int, std::size_t> expected = {
      {1, 10144}, {3, 297474}, {4, 297613}, {6, 691853}, {10, 1086093}};
  std::string detail;
  bool pass = true;
  for (const auto& [id, total] : expected) {
    const std::size_t got = model::count_params(model::ModelConfig::preset(id)).total();
    pass = pass && got == total;
    detail += fmt("model %d: %zu%s ", id, got, got == total ? "" : " (mismatch)");
  }
  return {pass, detail};
}

// ---- 2 ---------------------------------------------------------------------

Outcome gradient_check() {
  model::ModelConfig c;
  c.b = 2;
  c.n = 4;
  c.C = 2;
  c.depth = 3;
  c.residual = true;
  c.pooling = model::Pooling::kWam;
  model::Model m = model::Model::build(c, 11);
  // Move off the symmetric initial point.
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0.0, 0.1);
  const auto mask = m.params().trainable_mask();
  for (std::size_t i = 0; i < m.params().size(); ++i) {
    if (mask[i]) m.params().flat()[i] += g(rng);
  }
  std::uniform_int_distribution<int> h(0, 6), q(1, 30);
  const std::size_t batch = 3;
  std::vector<double> x;
  for (std::size_t e = 0; e < batch * features::kAcCount; ++e) {
    const double qk = q(rng);
    for (int i = 0; i < c.bins(); ++i) {
      x.push_back(h(rng));
      x.push_back(qk);
    }
  }
  const std::vector<double> y{1, 0, 1};
  const std::uint64_t dropout_seed = 5;

  const auto analytic = m.forward_backward(x, y, dropout_seed, true).grads;
  auto& flat = m.params().flat();
  const double step = 1e-5;
  std::size_t failed = 0;
  double worst_abs = 0.0, worst_rel = 0.0;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double keep = flat[i];
    flat[i] = keep + step;
    const double up = m.forward_backward(x, y, dropout_seed, true).loss;
    flat[i] = keep - step;
    const double down = m.forward_backward(x, y, dropout_seed, true).loss;
    flat[i] = keep;
    const double numeric = (up - down) / (2 * step);
    const double diff = std::abs(analytic[i] - numeric);
    const double scale = std::max(std::abs(analytic[i]), std::abs(numeric));
    const double rel = scale > 0.0 ? diff / scale : 0.0;
    worst_abs = std::max(worst_abs, diff);
    worst_rel = std::max(worst_rel, rel);
    failed += diff > 1e-8 && rel > 1e-5;
  }
  return {failed == 0,
          fmt("%zu parameters, %zu outside tolerance; worst absolute difference %.2e, worst "
              "unfloored relative error %.2e",
              flat.size(), failed, worst_abs, worst_rel)};
}

// ---- 3 ---------------------------------------------------------------------

Outcome quantization_oracle() {
  const std::vector<std::pair<int, int>> pairs = {
      {1, 1}, {4, 2}, {3, 2}, {2, 4}, {5, 5}, {6, 4}, {6, 2}, {2, 3}, {9, 3}, {3, 9},
      {7, 5}, {5, 7}, {8, 4}, {4, 8}, {2, 2}, {10, 3}, {3, 10}, {12, 4}, {1, 3}, {3, 1}};
  const std::vector<quant::DensitySpec> densities = {quant::DensitySpec::uniform(-40.0, 40.0),
                                                     quant::DensitySpec::gaussian(0.5, 9.0),
                                                     quant::DensitySpec::laplacian(0.0, 10.0)};
  bool pass = true;
  double worst_tv = 0.0;
  int s1 = 0, s5 = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [q1, q2] = pairs[i];
    const auto& density = densities[i % densities.size()];
    const quant::Pmf analytic = quant::pmf_double(q1, q2, density);
    const quant::Pmf sampled = quant::empirical_pmf(q1, q2, 1000000, density, 100 + i);
    const double tv = quant::total_variation(analytic, sampled);
    worst_tv = std::max(worst_tv, tv);
    pass = pass && tv <= 5e-3;
    switch (quant::classify_scenario(q1, q2)) {
      case quant::ScenarioKind::kS5: {
        ++s5;
        const quant::Pmf single = quant::pmf_single(q1, density);
        for (int d = analytic.d_min; d <= analytic.d_max(); ++d) {
          pass = pass && std::abs(analytic.at(d) - single.at(d)) <= 1e-12;
        }
        break;
      }
      case quant::ScenarioKind::kS1: {
        ++s1;
        const int period = q1 / q2;
        for (int d = analytic.d_min; d <= analytic.d_max(); ++d) {
          if (d % period != 0) pass = pass && analytic.at(d) == 0.0 && sampled.at(d) == 0.0;
        }
        break;
      }
      default:
        break;
    }
  }
  return {pass, fmt("%zu cases, worst TV %.2e, %d S1 and %d S5 cases exact", pairs.size(),
                    worst_tv, s1, s5)};
}

// ---- 4 ---------------------------------------------------------------------

Outcome jpeg_round_trip() {
  int passed = 0, gray = 0, color = 0, with_restart = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(7000 + seed);
    std::uniform_int_distribution<int> dim(1, 80);
    const int width = dim(rng);
    const int height = dim(rng);
    const bool is_color = seed % 2 == 1;
    const auto frame = is_color ? jpeg::FrameInfo::ycbcr444(width, height)
                                : jpeg::FrameInfo::grayscale(width, height);
    std::vector<jpeg::CoeffPlane> planes;
    std::vector<jpeg::QuantMatrix> qs;
    for (int c = 0; c < frame.component_count(); ++c) {
      planes.push_back(test_util::random_plane(rng, frame.width_blocks(), frame.height_blocks(),
                                               frame.components[c].id));
      qs.push_back(test_util::random_qmatrix(rng));
    }
    // Every fourth case is written by libjpeg with restart markers, the
    // rest by the in-house encoder.
    std::vector<std::uint8_t> bytes;
    unsigned restart = 0;
    if (seed % 4 == 3) {
      restart = static_cast<unsigned>(1 + seed % 5);
      libjpeg_oracle::WriteOptions options;
      options.restart_interval = restart;
      bytes = libjpeg_oracle::write_coefficients(planes, qs, width, height, options);
      ++with_restart;
    } else {
      bytes = jpeg::encode_jpeg(planes, qs, frame);
    }
    const auto parsed = jpeg::parse_jpeg(bytes);
    bool ok = parsed.frame.width == width && parsed.frame.height == height &&
              parsed.qmatrices == qs &&
              parsed.restart_interval == static_cast<int>(restart) &&
              parsed.planes.size() == planes.size();
    for (std::size_t c = 0; ok && c < planes.size(); ++c) {
      ok = parsed.planes[c].blocks == planes[c].blocks;
    }
    passed += ok;
    (is_color ? color : gray)++;
  }
  return {passed == 100, fmt("%d/100 exact (%d grayscale, %d 4:4:4, %d with restart markers)",
                             passed, gray, color, with_restart)};
}

// ---- 5 and 6 ---------------------------------------------------------------

struct DeskScale {
  std::size_t images = 0;
  std::size_t patches = 0;
  std::size_t pool = 0;
  std::size_t seen = 0, unseen = 0;
  std::size_t big_seen = 0, big_unseen = 0;
  bool disjoint = false;
  double val_accuracy = 0.0;
  double control_accuracy = 0.0;
  std::optional<train::ExperimentReport> report;
  double minutes = 0.0;
};

const DeskScale& desk_scale() {
  static std::optional<DeskScale> cached;
  if (cached) return *cached;
  const auto start = std::chrono::steady_clock::now();
  DeskScale r;
  const int threads = util::resolve_threads(0);

  std::vector<data::NamedImage> images;
  for (int i = 0; i < 60; ++i) {
    images.push_back({"synth_" + std::to_string(i),
                      data::synthesize_image(448, 320, 1000 + i, data::SynthTexture::rough())});
  }
  const auto pool = data::custom_q_pool(20, 75, 98, 7);
  data::DatasetConfig dc;
  dc.patch_size = 64;
  dc.source_size = 0;
  dc.seed = 3;
  const data::Dataset ds = data::build_dataset(images, pool, dc, threads);
  r.images = images.size();
  r.patches = ds.manifest.records.size();
  r.pool = ds.manifest.pool.size();
  r.seen = ds.manifest.seen_pool.size();
  r.unseen = ds.manifest.unseen_pool.size();
  const auto big = data::split_q_pool(data::custom_q_pool(1120, 50, 99, 8), 0.7, 9);
  r.big_seen = big.seen.size();
  r.big_unseen = big.unseen.size();
  try {
    train::check_unseen_disjoint(ds.manifest);
    r.disjoint = true;
  } catch (const Error&) {
    r.disjoint = false;
  }

  model::ModelConfig mc;
  mc.n = 32;
  mc.b = 20;
  train::TrainConfig tc;
  tc.epochs = 25;
  tc.seed = 5;
  tc.threads = threads;
  auto progress = [](const char* what) {
    return [what](const train::EpochLog& e) {
      std::fprintf(stderr, "  %s %s\n", what, train::epoch_json(e).c_str());
    };
  };
  r.report = train::run_experiment(ds, mc, tc, progress("desk-scale"));
  r.val_accuracy = r.report->training.best_val_accuracy;

  auto features_of = [&](data::Split s) {
    const auto idx = ds.manifest.indices(s);
    return train::build_features(ds, idx, mc.b, mc.order, threads);
  };
  const auto control = train::train(train::permute_labels(features_of(data::Split::kTrain), 21),
                                    train::permute_labels(features_of(data::Split::kVal), 22), mc,
                                    tc, progress("control"));
  r.control_accuracy = control.best_val_accuracy;
  r.minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;
  cached = std::move(r);
  return *cached;
}

Outcome separability() {
  const DeskScale& d = desk_scale();
  const bool data_ok = d.images >= 50 && d.patches >= 4000 && d.pool == 20;
  const double margin = d.val_accuracy - d.control_accuracy;
  return {data_ok && d.val_accuracy >= 0.85 && margin >= 0.25,
          fmt("%zu patches from %zu images, pool %zu; val accuracy %.4f, permuted control "
              "%.4f, margin %.4f; %.1f min",
              d.patches, d.images, d.pool, d.val_accuracy, d.control_accuracy, margin,
              d.minutes)};
}

Outcome unseen_generalization() {
  const DeskScale& d = desk_scale();
  const bool sizes = d.seen == 14 && d.unseen == 6 && d.big_seen == 784 && d.big_unseen == 336;
  const bool reports = d.report && d.report->test_unseen.has_value();
  const double seen = reports ? d.report->test.accuracy() : 0.0;
  const double unseen = reports ? d.report->test_unseen->accuracy() : 0.0;
  return {sizes && d.disjoint && reports && unseen >= 0.75,
          fmt("pool splits %zu/%zu and %zu/%zu, disjoint %s; seen test %.4f, unseen test %.4f",
              d.seen, d.unseen, d.big_seen, d.big_unseen, d.disjoint ? "yes" : "no", seen,
              unseen)};
}

// ---- 7 ---------------------------------------------------------------------

Outcome recipe_fidelity() {
  const std::vector<std::pair<int, double>> bands = {
      {1, 1e-3}, {10, 1e-3}, {11, 5e-4}, {15, 5e-4}, {16, 1e-4},
      {20, 1e-4}, {21, 5e-5}, {25, 5e-5}, {26, 1e-5}, {30, 1e-5}};
  bool schedule = true;
  for (int e = 1; e <= 30; ++e) {
    const double want = e <= 10 ? 1e-3 : e <= 15 ? 5e-4 : e <= 20 ? 1e-4 : e <= 25 ? 5e-5 : 1e-5;
    schedule = schedule && train::lr_schedule(e) == want;
  }
  for (const auto& [e, lr] : bands) schedule = schedule && train::lr_schedule(e) == lr;

  const model::ModelConfig c;  // default architecture
  const model::Model m = model::Model::build(c, 3);
  bool forget = true;
  double worst_orth = 0.0;
  const int n = c.n;
  for (int layer = 1; layer <= c.depth; ++layer) {
    for (const char* dir : {"fwd", "bwd"}) {
      const std::string prefix = "lstm" + std::to_string(layer) + "." + dir;
      const auto b = m.params().values(prefix + ".b");
      for (int j = 0; j < n; ++j) forget = forget && b[j] == 1.0;
      for (int j = n; j < 4 * n; ++j) forget = forget && b[j] == 0.0;
      const auto V = m.params().values(prefix + ".V");
      for (int gate = 0; gate < 4; ++gate) {
        const double* G = V.data() + static_cast<std::size_t>(gate) * n * n;
        for (int a = 0; a < n; ++a) {
          for (int bcol = a; bcol < n; ++bcol) {
            double dot = 0.0;
            for (int r = 0; r < n; ++r) dot += G[r * n + a] * G[r * n + bcol];
            worst_orth = std::max(worst_orth, std::abs(dot - (a == bcol ? 1.0 : 0.0)));
          }
        }
      }
    }
  }
  return {schedule && forget && worst_orth <= 1e-6,
          fmt("schedule %s, forget biases %s, worst |Q^T Q - I| %.2e", schedule ? "exact" : "wrong",
              forget ? "1" : "wrong", worst_orth)};
}

// ---- 8 ---------------------------------------------------------------------

Outcome metric_identities() {
  std::mt19937_64 rng(808);
  bool counts_ok = true;
  for (int t = 0; t < 1000; ++t) {
    const train::Confusion c{rng() % 5000, rng() % 5000, rng() % 5000, rng() % 5000};
    if (c.positives() > 0) {
      counts_ok = counts_ok && static_cast<std::uint64_t>(std::llround(c.tpr() * c.positives())) == c.tp;
    }
    if (c.negatives() > 0) {
      counts_ok = counts_ok && static_cast<std::uint64_t>(std::llround(c.tnr() * c.negatives())) == c.tn;
    }
    if (c.total() > 0) {
      counts_ok = counts_ok &&
                  static_cast<std::uint64_t>(std::llround(c.accuracy() * c.total())) == c.tp + c.tn;
    }
    counts_ok = counts_ok && c.total() == c.positives() + c.negatives();
  }
  double worst = 0.0;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng() % 500;
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = t % 3 == 0 ? std::floor(u(rng) * 8) : u(rng);  // some sets with ties
      y[i] = u(rng) < 0.25 + 0.5 * s[i] / (t % 3 == 0 ? 8 : 1);
    }
    y[0] = 0;
    y[1] = 1;
    worst = std::max(worst, std::abs(train::roc_auc(s, y).auc - train::rank_auc(s, y)));
  }
  return {counts_ok && worst <= 1e-9,
          fmt("count identities %s on 1000 draws; worst |trapezoid - rank| %.2e over 100 sets",
              counts_ok ? "hold" : "broken", worst)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"parameter counts", parameter_counts},
      {"gradient check", gradient_check},
      {"quantization model", quantization_oracle},
      {"JPEG round trip", jpeg_round_trip},
      {"desk-scale separability", separability},
      {"unseen-Q generalization", unseen_generalization},
      {"schedule and initialization", recipe_fidelity},
      {"metric identities", metric_identities},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.contains(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("[%s] %d. %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
