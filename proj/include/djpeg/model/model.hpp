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

// Double-compression detector: a per-frequency projector over (histogram,
// q-factor) pairs, a stack of bidirectional LSTMs over the 63 AC
// frequencies, a pooling stage and a logistic head.
//
// Input layout is the HQInput layout of the features module: for each of
// the 63 frequencies, 2b+1 bins, each a (histogram, q) pair.

#ifndef DJPEG_MODEL_MODEL_HPP_
#define DJPEG_MODEL_MODEL_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "djpeg/features/features.hpp"
#include "djpeg/nn/ops.hpp"
#include "djpeg/nn/tensor.hpp"

namespace djpeg::model {

enum class Pooling { kWam, kLast, kFirst, kAddFirstLast, kConcatFirstLast };

std::string_view pooling_name(Pooling p);
Pooling parse_pooling(std::string_view name);  // ConfigError

enum class ProjectorKind {
  kNone,        // the encoder sees the raw rows
  kFull,        // C affine filters, BN, ReLU, 1x1 reduction to one channel
  kSingleConv,  // one 1x1 convolution, BN, ReLU
};

std::string_view projector_name(ProjectorKind k);
ProjectorKind parse_projector(std::string_view name);  // ConfigError

struct ModelConfig {
  int b = 80;
  int n = 128;
  int C = 16;
  // Number of BiLSTM layers. 0 replaces the encoder, pooling and head with
  // one logistic unit over the flattened encoder input.
  int depth = 3;
  bool residual = true;  // layer 3 reads s1 + s2
  Pooling pooling = Pooling::kWam;
  features::FreqOrder order = features::FreqOrder::kRaster;
  bool use_q_channel = true;
  ProjectorKind projector = ProjectorKind::kFull;
  double dropout = 0.1;            // LSTM input dropout
  double recurrent_dropout = 0.1;  // LSTM state dropout

  int bins() const { return 2 * b + 1; }
  // Per-frequency vector width seen by the first encoder layer.
  std::size_t encoder_input_dim() const;
  std::size_t pooled_dim() const;
  // ConfigError describing the first invalid field.
  void validate() const;

  // Ablation-table architectures 1 through 17.
  static ModelConfig preset(int model_id);

  bool operator==(const ModelConfig&) const = default;
};

std::string config_to_json(const ModelConfig& c);
ModelConfig config_from_json(std::string_view json);  // FormatError / ConfigError

struct ParamCount {
  std::size_t trainable = 0;
  std::size_t non_trainable = 0;
  std::size_t total() const { return trainable + non_trainable; }
};

// Closed form; equals the size of the parameter store that build() creates.
ParamCount count_params(const ModelConfig& c);

// Parameters of a trained or freshly initialized network plus the layout
// bookkeeping needed to run it.
class Model {
 public:
  // Glorot kernels, orthogonal recurrent blocks, forget biases one, other
  // biases zero, BN scale one and shift zero, running variance one.
  static Model build(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

  std::size_t input_size() const;  // doubles per example

  // Intermediate values of one example, for inspection and tests.
  struct Trace {
    std::vector<double> x;                    // 63 x encoder_input_dim
    std::vector<std::vector<double>> layers;  // per layer, 63 x 2n
    std::vector<double> pool_weights;         // WAM weights (63) when used
    std::vector<double> pooled;
    double logit = 0.0;
    double prob = 0.0;
  };

  // Inference (running BN statistics, no dropout). `inputs` holds `count`
  // consecutive examples. ShapeError on size mismatch.
  std::vector<double> predict(std::span<const double> inputs, int threads = 1) const;
  Trace trace(std::span<const double> example) const;

  struct Gradients {
    double loss = 0.0;                // mean binary cross-entropy
    std::vector<double> probs;        // per example
    std::vector<double> grads;        // aligned with params().flat()
    std::vector<double> bn_mean;      // batch statistics of the projector BN
    std::vector<double> bn_var;
  };

  // Train-mode forward and exact backward pass of the mean loss over a batch.
  // Dropout masks derive from (dropout_seed, position in batch); set
  // `dropout` false to disable them. Results do not depend on `threads`.
  Gradients forward_backward(std::span<const double> inputs, std::span<const double> labels,
                             std::uint64_t dropout_seed, bool dropout = true,
                             int threads = 1) const;

  // Folds batch statistics into the running BN statistics.
  void update_running_stats(const Gradients& g);

  bool operator==(const Model&) const = default;

 private:
  Model(ModelConfig config, nn::ParamStore params);

  ModelConfig config_;
  nn::ParamStore params_;
};

// Checkpoint I/O. FormatError on malformed data, ConfigError when tensors
// disagree with the stored config, IoError on file failures.
std::vector<std::uint8_t> encode_checkpoint(const Model& model);
Model decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

// Softmax of `scores` (stable). Exposed for property tests.
std::vector<double> softmax(std::span<const double> scores);

}  // namespace djpeg::model

#endif  // DJPEG_MODEL_MODEL_HPP_
