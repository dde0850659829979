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

#include "djpeg/train/train.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>

#include "djpeg/error.hpp"
#include "djpeg/nn/ops.hpp"
#include "djpeg/util/parallel.hpp"
#include "djpeg/util/rng.hpp"
#include "json.hpp"

namespace djpeg::train {
namespace {

constexpr std::size_t kPredictChunk = 256;

void check_features(const features::FeatureSet& set, const model::ModelConfig& c,
                    const char* what) {
  require(set.b == c.b && set.order == c.order, ErrorCode::kConfigError,
          std::string(what) + " features use b=" + std::to_string(set.b) + " order=" +
              std::string(features::order_name(set.order)) + " but the model expects b=" +
              std::to_string(c.b) + " order=" + std::string(features::order_name(c.order)));
}

double accuracy_of(std::span<const double> probs, std::span<const std::uint8_t> labels,
                   double threshold) {
  return confusion(probs, labels, threshold).accuracy();
}

}  // namespace

double lr_schedule(int epoch) {
  require(epoch >= 1 && epoch <= kMaxEpochs, ErrorCode::kDomainError,
          "epoch " + std::to_string(epoch) + " is outside the schedule (1-30)");
  if (epoch <= 10) return 1e-3;
  if (epoch <= 15) return 5e-4;
  if (epoch <= 20) return 1e-4;
  if (epoch <= 25) return 5e-5;
  return 1e-5;
}

void TrainConfig::validate() const {
  require(epochs >= 1 && epochs <= kMaxEpochs, ErrorCode::kConfigError,
          "epochs must be in [1, 30]");
  require(batch_size >= 1, ErrorCode::kConfigError, "batch size must be positive");
  require(threshold > 0.0 && threshold < 1.0, ErrorCode::kConfigError,
          "threshold must be in (0, 1)");
}

std::string epoch_json(const EpochLog& e) {
  nlohmann::ordered_json j;
  j["epoch"] = e.epoch;
  j["lr"] = e.lr;
  j["train_loss"] = e.train_loss;
  j["train_accuracy"] = e.train_accuracy;
  j["val_loss"] = e.val_loss;
  j["val_accuracy"] = e.val_accuracy;
  j["best"] = e.best;
  return j.dump();
}

std::vector<double> gather_inputs(const features::FeatureSet& set,
                                  std::span<const std::size_t> indices) {
  const std::size_t per = set.row_size() * 2;
  std::vector<double> out(indices.size() * per);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    set.fill_hq(indices[i], std::span(out).subspan(i * per, per));
  }
  return out;
}

std::vector<double> predict_set(const model::Model& model, const features::FeatureSet& set,
                                int threads) {
  check_features(set, model.config(), "evaluation");
  std::vector<double> scores;
  scores.reserve(set.size());
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < set.size(); start += kPredictChunk) {
    idx.resize(std::min(kPredictChunk, set.size() - start));
    std::iota(idx.begin(), idx.end(), start);
    const auto part = model.predict(gather_inputs(set, idx), threads);
    scores.insert(scores.end(), part.begin(), part.end());
  }
  return scores;
}

EvalReport evaluate(const model::Model& model, const features::FeatureSet& set,
                    std::string name, double threshold, int threads) {
  require(set.size() > 0, ErrorCode::kEmptySplit, "nothing to evaluate in '" + name + "'");
  const auto scores = predict_set(model, set, threads);
  return make_report(std::move(name), scores, set.labels, threshold);
}

TrainResult train(const features::FeatureSet& train_set, const features::FeatureSet& val_set,
                  const model::ModelConfig& model_config, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  model_config.validate();
  require(train_set.size() > 0, ErrorCode::kEmptySplit, "the training split is empty");
  require(val_set.size() > 0, ErrorCode::kEmptySplit, "the validation split is empty");
  check_features(train_set, model_config, "training");
  check_features(val_set, model_config, "validation");

  model::Model model = model::Model::build(model_config, util::derive_seed(config.seed, 1));
  nn::AdamState adam;
  const auto mask = model.params().trainable_mask();
  TrainResult result{model, 0, -1.0, {}};

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  std::vector<double> labels;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochLog log;
    log.epoch = epoch;
    log.lr = lr_schedule(epoch);
    std::mt19937_64 shuffle_rng(util::derive_seed(config.seed, 0x100 + epoch));
    util::shuffle(shuffle_rng, order);

    std::size_t correct = 0;
    for (std::size_t start = 0, step = 0; start < order.size(); start += batch, ++step) {
      const std::span<const std::size_t> idx(order.data() + start,
                                             std::min(batch, order.size() - start));
      labels.resize(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) labels[i] = train_set.labels[idx[i]];
      const std::uint64_t dropout_seed =
          util::derive_seed(config.seed, (static_cast<std::uint64_t>(epoch) << 32) | step);
      const auto g = model.forward_backward(gather_inputs(train_set, idx), labels,
                                            dropout_seed, true, config.threads);
      nn::check_finite(g.grads, "gradient");
      nn::adam_step(model.params().flat(), g.grads, adam, log.lr, mask);
      model.update_running_stats(g);
      nn::check_finite(model.params().flat(), "parameters");
      log.train_loss += g.loss * static_cast<double>(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) {
        correct += (g.probs[i] >= config.threshold) == (labels[i] > 0.5);
      }
    }
    log.train_loss /= static_cast<double>(order.size());
    log.train_accuracy = static_cast<double>(correct) / static_cast<double>(order.size());

    const auto val_scores = predict_set(model, val_set, config.threads);
    log.val_accuracy = accuracy_of(val_scores, val_set.labels, config.threshold);
    log.val_loss = nn::bce_loss(val_scores, std::vector<double>(val_set.labels.begin(),
                                                                val_set.labels.end()));
    if (log.val_accuracy > result.best_val_accuracy) {
      log.best = true;
      result.best_val_accuracy = log.val_accuracy;
      result.best_epoch = epoch;
      result.model = model;
    }
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  return result;
}

features::FeatureSet build_features(const data::Dataset& dataset,
                                    std::span<const std::size_t> indices, int b,
                                    features::FreqOrder order, int threads) {
  require(dataset.planes.size() == dataset.manifest.records.size(), ErrorCode::kShapeError,
          "dataset planes and records are not aligned");
  std::vector<features::HistogramSet> hists(indices.size());
  util::parallel_for(indices.size(), threads, [&](std::size_t i) {
    hists[i] = features::extract_histograms(dataset.planes.at(indices[i]), b);
  });
  features::FeatureSet set(b, order);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto& rec = dataset.manifest.records[indices[i]];
    set.add(hists[i], rec.final_q(), rec.label == data::Label::kDouble ? 1 : 0);
  }
  return set;
}

features::FeatureSet permute_labels(const features::FeatureSet& set, std::uint64_t seed) {
  features::FeatureSet out = set;
  std::mt19937_64 rng(seed);
  util::shuffle(rng, out.labels);
  return out;
}

void check_unseen_disjoint(const data::DatasetManifest& m) {
  std::vector<jpeg::QuantMatrix> training;
  for (int i : m.seen_pool) training.push_back(m.pool.at(i));
  for (const auto& r : m.records) {
    if (r.split == data::Split::kTrain) training.push_back(r.final_q());
  }
  for (const auto& r : m.records) {
    if (r.split != data::Split::kTestUnseen) continue;
    const bool overlap =
        std::find(training.begin(), training.end(), r.final_q()) != training.end();
    require(!overlap, ErrorCode::kConfigError,
            "test_unseen record " + std::to_string(r.id) +
                " uses a final Q-matrix that also appears in training");
  }
}

std::optional<double> ExperimentReport::unseen_delta() const {
  if (!test_unseen) return std::nullopt;
  return test_unseen->accuracy() - test.accuracy();
}

std::string ExperimentReport::table() const {
  std::string out = "split          count    TPR      TNR      accuracy  AUC\n";
  char line[160];
  auto row = [&](const EvalReport& r) {
    std::snprintf(line, sizeof line, "%-13s %6llu  %7.4f  %7.4f  %8.4f  %s\n", r.name.c_str(),
                  static_cast<unsigned long long>(r.counts.total()), r.tpr(), r.tnr(),
                  r.accuracy(), r.roc ? std::to_string(r.roc->auc).substr(0, 6).c_str() : "n/a");
    out += line;
  };
  row(val);
  row(test);
  if (test_unseen) row(*test_unseen);
  if (const auto d = unseen_delta()) {
    std::snprintf(line, sizeof line, "unseen - seen accuracy: %+.4f\n", *d);
    out += line;
  }
  std::snprintf(line, sizeof line, "best epoch: %d (val accuracy %.4f)\n", training.best_epoch,
                training.best_val_accuracy);
  out += line;
  return out;
}

std::string ExperimentReport::to_jsonl() const {
  std::string out = report_json(val) + "\n" + report_json(test) + "\n";
  if (test_unseen) out += report_json(*test_unseen) + "\n";
  nlohmann::ordered_json s;
  s["best_epoch"] = training.best_epoch;
  s["best_val_accuracy"] = training.best_val_accuracy;
  s["seen_accuracy"] = test.accuracy();
  const auto d = unseen_delta();
  s["unseen_accuracy"] = test_unseen ? nlohmann::ordered_json(test_unseen->accuracy())
                                     : nlohmann::ordered_json(nullptr);
  s["unseen_minus_seen"] = d ? nlohmann::ordered_json(*d) : nlohmann::ordered_json(nullptr);
  return out + s.dump() + "\n";
}

ExperimentReport run_experiment(const data::Dataset& dataset,
                                const model::ModelConfig& model_config,
                                const TrainConfig& config, const EpochCallback& on_epoch) {
  const auto& m = dataset.manifest;
  auto features_of = [&](data::Split s) {
    const auto idx = m.indices(s);
    return build_features(dataset, idx, model_config.b, model_config.order, config.threads);
  };
  const auto train_set = features_of(data::Split::kTrain);
  const auto val_set = features_of(data::Split::kVal);
  const auto test_set = features_of(data::Split::kTest);
  const auto unseen_set = features_of(data::Split::kTestUnseen);
  require(test_set.size() > 0, ErrorCode::kEmptySplit, "the test split is empty");
  if (unseen_set.size() > 0) check_unseen_disjoint(m);

  ExperimentReport r{train(train_set, val_set, model_config, config, on_epoch), {}, {}, {}};
  r.val = evaluate(r.training.model, val_set, "val", config.threshold, config.threads);
  r.test = evaluate(r.training.model, test_set, "test", config.threshold, config.threads);
  if (unseen_set.size() > 0) {
    r.test_unseen =
        evaluate(r.training.model, unseen_set, "test_unseen", config.threshold, config.threads);
  }
  return r;
}

}  // namespace djpeg::train
