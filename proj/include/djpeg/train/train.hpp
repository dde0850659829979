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

// Training loop, evaluation and the seen/unseen Q-matrix experiment.

#ifndef DJPEG_TRAIN_TRAIN_HPP_
#define DJPEG_TRAIN_TRAIN_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "djpeg/data/dataset.hpp"
#include "djpeg/features/features.hpp"
#include "djpeg/model/model.hpp"
#include "djpeg/train/metrics.hpp"

namespace djpeg::train {

inline constexpr int kMaxEpochs = 30;

// Step schedule over epochs 1-30. DomainError outside that range.
double lr_schedule(int epoch);

struct TrainConfig {
  int epochs = 25;
  int batch_size = 64;
  std::uint64_t seed = 1;
  int threads = 1;
  double threshold = 0.5;

  void validate() const;  // ConfigError
};

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;      // mean over the epoch, train-mode passes
  double train_accuracy = 0.0;  // from the same passes
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  bool best = false;  // validation accuracy strictly improved

  bool operator==(const EpochLog&) const = default;
};

// One JSON object per epoch, no trailing newline.
std::string epoch_json(const EpochLog& e);

struct TrainResult {
  model::Model model;  // parameters from the best validation epoch
  int best_epoch = 0;
  double best_val_accuracy = 0.0;
  std::vector<EpochLog> log;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Adam on mean binary cross-entropy with shuffled mini-batches (the last
// partial batch is kept). Validation runs in inference mode after every
// epoch. EmptySplit when either set is empty; ConfigError when the feature
// sets' b or order disagree with the model config.
TrainResult train(const features::FeatureSet& train_set, const features::FeatureSet& val_set,
                  const model::ModelConfig& model_config, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

// Model inputs of the listed records, concatenated.
std::vector<double> gather_inputs(const features::FeatureSet& set,
                                  std::span<const std::size_t> indices);

// Scores of every record, computed in chunks.
std::vector<double> predict_set(const model::Model& model, const features::FeatureSet& set,
                                int threads = 1);

// EmptySplit on an empty set.
EvalReport evaluate(const model::Model& model, const features::FeatureSet& set,
                    std::string name, double threshold = 0.5, int threads = 1);

// Histogram features of the listed dataset records.
features::FeatureSet build_features(const data::Dataset& dataset,
                                    std::span<const std::size_t> indices, int b,
                                    features::FreqOrder order, int threads = 1);

// Same records with labels shuffled (a null-separability control).
features::FeatureSet permute_labels(const features::FeatureSet& set, std::uint64_t seed);

// ConfigError if any test_unseen record's final Q-matrix appears in the
// seen pool or as the final Q-matrix of a training record.
void check_unseen_disjoint(const data::DatasetManifest& manifest);

struct ExperimentReport {
  TrainResult training;
  EvalReport val;
  EvalReport test;
  std::optional<EvalReport> test_unseen;

  // Unseen minus seen test accuracy.
  std::optional<double> unseen_delta() const;
  // Plain-text comparison table.
  std::string table() const;
  // JSON lines: one report per split, then a summary line.
  std::string to_jsonl() const;
};

// Trains once on the train split (selecting on val) and evaluates the test
// and, when present, test_unseen splits.
ExperimentReport run_experiment(const data::Dataset& dataset,
                                const model::ModelConfig& model_config,
                                const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace djpeg::train

#endif  // DJPEG_TRAIN_TRAIN_HPP_
