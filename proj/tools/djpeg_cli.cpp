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

// djpeg: dataset generation, training, evaluation and inspection tool.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "djpeg/data/dataset.hpp"
#include "djpeg/data/image.hpp"
#include "djpeg/error.hpp"
#include "djpeg/features/features.hpp"
#include "djpeg/jpeg/codec.hpp"
#include "djpeg/model/model.hpp"
#include "djpeg/quant/quant_model.hpp"
#include "djpeg/train/metrics.hpp"
#include "djpeg/train/train.hpp"
#include "djpeg/util/parallel.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace djpeg;
using nlohmann::ordered_json;

namespace {

constexpr int kUsageExit = 2;
constexpr int kFailureExit = 1;

const std::vector<data::Split> kAllSplits = {data::Split::kTrain, data::Split::kVal,
                                             data::Split::kTest, data::Split::kTestUnseen};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  jpeg::write_file_bytes(
      path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// "-" or empty means stdout.
void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text << std::flush;
  } else {
    write_text(out, text);
  }
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("djpeg");
  logger->set_pattern("[%H:%M:%S.%e] %^%l%$ %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("DJPEG_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept the exact spelling.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

// Model options. Unset fields keep the preset (or default) value.
struct ModelFlags {
  std::optional<int> preset, b, n, C, depth;
  std::optional<std::string> pooling, order, projector;
  std::optional<double> dropout, recurrent_dropout;
  bool no_residual = false;
  bool no_q_channel = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--preset", preset, "Start from ablation architecture 1-17")
        ->check(CLI::Range(1, 17));
    cmd->add_option("--bin-range,-b", b, "Histogram bins span [-b, b] (default 80)");
    cmd->add_option("--hidden,-n", n, "LSTM units per direction (default 128)");
    cmd->add_option("--filters,-C", C, "Projector channels (default 16)");
    cmd->add_option("--depth", depth, "BiLSTM layers (default 3)");
    cmd->add_option("--pooling", pooling, "wam, last, first, add or concat");
    cmd->add_option("--order", order, "Frequency order: raster or zigzag");
    cmd->add_option("--projector", projector, "full, single or none");
    cmd->add_option("--dropout", dropout, "LSTM input dropout rate");
    cmd->add_option("--recurrent-dropout", recurrent_dropout, "LSTM state dropout rate");
    cmd->add_flag("--no-residual", no_residual, "Disable the layer-3 skip connection");
    cmd->add_flag("--no-q-channel", no_q_channel, "Drop the q-factor input channel");
  }

  model::ModelConfig resolve() const {
    model::ModelConfig c = preset ? model::ModelConfig::preset(*preset) : model::ModelConfig{};
    if (b) c.b = *b;
    if (n) c.n = *n;
    if (C) c.C = *C;
    if (depth) {
      c.depth = *depth;
      if (c.depth < 3) c.residual = false;
    }
    if (pooling) c.pooling = model::parse_pooling(*pooling);
    if (order) c.order = features::parse_order(*order);
    if (projector) c.projector = model::parse_projector(*projector);
    if (dropout) c.dropout = *dropout;
    if (recurrent_dropout) c.recurrent_dropout = *recurrent_dropout;
    if (no_residual) c.residual = false;
    if (no_q_channel) c.use_q_channel = false;
    c.validate();
    return c;
  }
};

struct TrainFlags {
  train::TrainConfig config;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--epochs", config.epochs, "Training epochs (1-30)")->capture_default_str();
    cmd->add_option("--batch-size", config.batch_size, "Mini-batch size")->capture_default_str();
    cmd->add_option("--threshold", config.threshold, "Decision threshold")->capture_default_str();
  }
};

// Loads every stored patch of the listed splits next to the manifest.
data::Dataset load_dataset(const fs::path& manifest_path, int threads) {
  data::Dataset ds;
  ds.manifest = data::read_manifest(manifest_path);
  const fs::path base = manifest_path.parent_path();
  ds.planes.resize(ds.manifest.records.size());
  util::parallel_for(ds.planes.size(), threads, [&](std::size_t i) {
    ds.planes[i] = data::load_patch(base, ds.manifest.records[i]);
  });
  spdlog::info("loaded {} records from {}", ds.planes.size(), manifest_path.string());
  return ds;
}

features::FeatureSet split_features(const data::Dataset& ds, data::Split split, int b,
                                    features::FreqOrder order, int threads) {
  const auto idx = ds.manifest.indices(split);
  return train::build_features(ds, idx, b, order, threads);
}

fs::path features_file(const fs::path& dir, data::Split split) {
  return dir / (std::string(data::split_name(split)) + ".djpf");
}

// Features of one split from either a manifest (loaded once) or a features
// directory. A split without a features file is empty.
class SplitSource {
 public:
  SplitSource(std::string manifest, std::string features_dir, int threads)
      : manifest_(std::move(manifest)), features_dir_(std::move(features_dir)), threads_(threads) {
    require(manifest_.empty() != features_dir_.empty(), ErrorCode::kConfigError,
            "give exactly one of --manifest or --features");
  }

  features::FeatureSet get(data::Split split, int b, features::FreqOrder order) {
    if (!manifest_.empty()) {
      if (!dataset_) dataset_ = load_dataset(manifest_, threads_);
      return split_features(*dataset_, split, b, order, threads_);
    }
    const fs::path path = features_file(features_dir_, split);
    if (!fs::exists(path)) return features::FeatureSet(b, order);
    return features::read_features(path);
  }

 private:
  std::string manifest_, features_dir_;
  int threads_;
  std::optional<data::Dataset> dataset_;
};

void log_epoch(const train::EpochLog& e) {
  spdlog::info("epoch {:2d} lr {:.0e} train loss {:.4f} acc {:.4f} | val loss {:.4f} acc {:.4f}{}",
               e.epoch, e.lr, e.train_loss, e.train_accuracy, e.val_loss, e.val_accuracy,
               e.best ? " *" : "");
}

// ---- subcommands ---------------------------------------------------------

int cmd_synth_corpus(const fs::path& out, int count, int width, int height,
                     const std::string& texture, std::uint64_t seed) {
  const auto tex = texture == "rough" ? data::SynthTexture::rough() : data::SynthTexture::smooth();
  require(count >= 1, ErrorCode::kDomainError, "--count must be positive");
  fs::create_directories(out);
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "synth_%04d.pgm", i);
    data::write_pgm(out / name, data::synthesize_image(width, height, seed + i, tex));
  }
  spdlog::info("wrote {} images to {}", count, out.string());
  return 0;
}

int cmd_q_pool(const fs::path& out, int count, int min_quality, int max_quality,
               const std::vector<int>& standard, std::uint64_t seed) {
  const auto pool = standard.empty() ? data::custom_q_pool(count, min_quality, max_quality, seed)
                                     : data::standard_q_pool(standard);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  data::write_q_pool(out, pool);
  spdlog::info("wrote {} matrices to {}", pool.size(), out.string());
  return 0;
}

int cmd_gen_dataset(const fs::path& raw, const fs::path& q_pool_file, const fs::path& out,
                    const data::DatasetConfig& config, bool as_jpeg, int threads) {
  const auto images = data::load_corpus(raw);
  const auto pool = data::read_q_pool(q_pool_file);
  spdlog::info("{} images, {} matrices", images.size(), pool.size());
  data::Dataset ds = data::build_dataset(images, pool, config, threads);
  data::write_dataset(out, ds,
                      as_jpeg ? data::StorageFormat::kJpeg : data::StorageFormat::kCoefficients);
  ordered_json j;
  j["manifest"] = (out / "manifest.jsonl").string();
  j["records"] = ds.manifest.records.size();
  for (data::Split s : kAllSplits) {
    j[std::string(data::split_name(s))] = ds.manifest.indices(s).size();
  }
  j["seen_pool"] = ds.manifest.seen_pool.size();
  j["unseen_pool"] = ds.manifest.unseen_pool.size();
  char digest[24];
  std::snprintf(digest, sizeof digest, "%016llx",
                static_cast<unsigned long long>(ds.manifest.digest()));
  j["digest"] = digest;
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_features(const fs::path& manifest, const fs::path& out, int b,
                 features::FreqOrder order, int threads) {
  const data::Dataset ds = load_dataset(manifest, threads);
  fs::create_directories(out);
  ordered_json j;
  for (data::Split s : kAllSplits) {
    const auto set = split_features(ds, s, b, order, threads);
    if (set.size() == 0) continue;
    features::write_features(features_file(out, s), set);
    j[std::string(data::split_name(s))] = set.size();
  }
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_train(const std::string& manifest, const std::string& features_dir,
              const model::ModelConfig& mc, const train::TrainConfig& tc,
              const fs::path& checkpoint, const std::string& log_path) {
  SplitSource source(manifest, features_dir, tc.threads);
  const auto tr = source.get(data::Split::kTrain, mc.b, mc.order);
  const auto va = source.get(data::Split::kVal, mc.b, mc.order);
  spdlog::info("training on {} records, validating on {}", tr.size(), va.size());
  std::string lines;
  const auto result = train::train(tr, va, mc, tc, [&](const train::EpochLog& e) {
    log_epoch(e);
    lines += train::epoch_json(e) + "\n";
    if (log_path.empty()) std::cout << train::epoch_json(e) << "\n" << std::flush;
  });
  if (!log_path.empty()) write_text(log_path, lines);
  if (checkpoint.has_parent_path()) fs::create_directories(checkpoint.parent_path());
  model::save_checkpoint(result.model, checkpoint);
  spdlog::info("best epoch {} (val accuracy {:.4f}), saved {}", result.best_epoch,
               result.best_val_accuracy, checkpoint.string());
  return 0;
}

int cmd_eval(const fs::path& checkpoint, const std::string& manifest,
             const std::string& features_dir, const std::string& split_name, double threshold,
             const std::string& roc_out, int threads) {
  const model::Model m = model::load_checkpoint(checkpoint);
  const data::Split split = data::parse_split(split_name);
  const auto set =
      SplitSource(manifest, features_dir, threads).get(split, m.config().b, m.config().order);
  const auto report = train::evaluate(m, set, split_name, threshold, threads);
  std::cout << train::report_json(report) << "\n";
  if (!roc_out.empty()) {
    require(report.roc.has_value(), ErrorCode::kDegenerateLabels,
            "the split has a single class, no ROC curve");
    write_text(roc_out, train::roc_csv(*report.roc));
  }
  return 0;
}

// Luma plane and its Q-matrix from a JPEG or packed coefficient file.
std::pair<jpeg::CoeffPlane, jpeg::QuantMatrix> read_coefficients(const fs::path& path) {
  const auto bytes = jpeg::read_file_bytes(path);
  if (bytes.size() >= 4 && bytes[0] == 'D' && bytes[1] == 'J' && bytes[2] == 'P' &&
      bytes[3] == 'G') {
    jpeg::QuantMatrix q;
    auto plane = data::decode_djpg(bytes, &q);
    return {std::move(plane), q};
  }
  auto parsed = jpeg::parse_jpeg(bytes);
  return {std::move(parsed.planes.front()), parsed.qmatrices.front()};
}

int cmd_predict(const fs::path& checkpoint, const std::vector<std::string>& files,
                double threshold, int threads) {
  const model::Model m = model::load_checkpoint(checkpoint);
  const auto& c = m.config();
  int failures = 0;
  for (const auto& file : files) {
    ordered_json j;
    j["file"] = file;
    try {
      const auto [plane, q] = read_coefficients(file);
      const auto hq =
          features::assemble_hq(features::extract_histograms(plane, c.b), q, c.order);
      const double p = m.predict(hq.values, threads).front();
      j["probability"] = p;
      j["verdict"] = p >= threshold ? "double" : "single";
    } catch (const Error& e) {
      j["error"] = std::string(e.name());
      j["message"] = e.detail();
      ++failures;
    }
    std::cout << j.dump() << "\n";
  }
  return failures == 0 ? 0 : kFailureExit;
}

quant::DensitySpec make_density(const std::string& family, double p0, double p1) {
  if (family == "uniform") return quant::DensitySpec::uniform(p0, p1);
  if (family == "gaussian") return quant::DensitySpec::gaussian(p0, p1);
  if (family == "laplacian") return quant::DensitySpec::laplacian(p0, p1);
  fail(ErrorCode::kConfigError, "unknown density '" + family + "'");
}

int cmd_pmf(int q1, std::optional<int> q2, const quant::DensitySpec& density,
            quant::IntRange support, std::int64_t samples, std::uint64_t seed,
            const std::string& out) {
  require(q1 >= 1, ErrorCode::kDomainError, "q1 must be a positive integer");
  require(!q2 || *q2 >= 1, ErrorCode::kDomainError, "q2 must be a positive integer");
  require(support.lo <= support.hi, ErrorCode::kDomainError, "empty support");
  density.validate();
  const quant::Pmf pmf = samples > 0 ? quant::empirical_pmf(q1, q2, samples, density, seed, support)
                         : q2        ? quant::pmf_double(q1, *q2, density, support)
                                     : quant::pmf_single(q1, density, support);
  if (q2) spdlog::info("scenario {}", quant::scenario_name(quant::classify_scenario(q1, *q2)));
  emit(out, quant::pmf_to_csv(pmf));
  return 0;
}

int cmd_inspect(const fs::path& file, int b, int rows) {
  const auto bytes = jpeg::read_file_bytes(file);
  const auto parsed = jpeg::parse_jpeg(bytes);
  const auto& f = parsed.frame;
  std::printf("file: %s\n", file.string().c_str());
  std::printf("size: %dx%d, %d component(s), %dx%d blocks, restart interval %d\n", f.width,
              f.height, f.component_count(), f.width_blocks(), f.height_blocks(),
              parsed.restart_interval);
  for (int c = 0; c < f.component_count(); ++c) {
    const auto& info = f.components[c];
    std::printf("\ncomponent %d (id %d, sampling %dx%d, table %d) Q-matrix:\n", c, info.id,
                info.h_sampling, info.v_sampling, info.quant_table_id);
    const auto& q = parsed.qmatrices[c];
    for (int r = 0; r < 8; ++r) {
      for (int k = 0; k < 8; ++k) std::printf("%4d", q[r * 8 + k]);
      std::printf("\n");
    }
  }
  const auto h = features::extract_histograms(parsed.planes.front(), b);
  const auto& pos = features::ac_positions(features::FreqOrder::kZigzag);
  std::printf("\nluma AC histograms, zigzag order, b=%d (first %d):\n", b, rows);
  std::printf("  k  (r,c)   q   in-range  zero   mode\n");
  const auto& raster = features::ac_positions(features::FreqOrder::kRaster);
  for (int z = 0; z < std::min(rows, features::kAcCount); ++z) {
    const int p = pos[z];
    const int f = static_cast<int>(std::find(raster.begin(), raster.end(), p) - raster.begin());
    std::uint64_t in_range = 0;
    int mode = 0;
    for (int v = -b; v <= b; ++v) {
      in_range += h.at(f, v);
      if (h.at(f, v) > h.at(f, mode)) mode = v;
    }
    std::printf("%3d  (%d,%d) %4d  %8llu  %5u  %5d\n", z + 1, p / 8, p % 8,
                parsed.qmatrices.front()[p], static_cast<unsigned long long>(in_range),
                h.at(f, 0), mode);
  }
  return 0;
}

int cmd_experiment(const fs::path& manifest, const model::ModelConfig& mc,
                   const train::TrainConfig& tc, const fs::path& out) {
  const data::Dataset ds = load_dataset(manifest, tc.threads);
  const auto report = train::run_experiment(ds, mc, tc, log_epoch);
  fs::create_directories(out);
  std::string epochs;
  for (const auto& e : report.training.log) epochs += train::epoch_json(e) + "\n";
  write_text(out / "epochs.jsonl", epochs);
  write_text(out / "report.jsonl", report.to_jsonl());
  write_text(out / "model_config.json", model::config_to_json(mc) + "\n");
  model::save_checkpoint(report.training.model, out / "model.djpm");
  if (report.test.roc) write_text(out / "roc_test.csv", train::roc_csv(*report.test.roc));
  if (report.test_unseen && report.test_unseen->roc) {
    write_text(out / "roc_test_unseen.csv", train::roc_csv(*report.test_unseen->roc));
  }
  std::cout << report.table();
  return 0;
}

int cmd_params(const model::ModelConfig& mc) {
  const auto count = model::count_params(mc);
  ordered_json j;
  j["config"] = ordered_json::parse(model::config_to_json(mc));
  j["trainable"] = count.trainable;
  j["non_trainable"] = count.non_trainable;
  j["total"] = count.total();
  std::cout << j.dump() << "\n";
  return 0;
}

void print_error(std::string_view code, const std::string& message) {
  ordered_json j;
  j["error"] = code;
  j["message"] = message;
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Double JPEG compression detection toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read options from a TOML/INI file (flags take precedence)");
  int threads = 0;
  std::uint64_t seed = 1;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--seed", seed, "Random seed")->capture_default_str();

  // synth-corpus
  auto* synth = app.add_subcommand("synth-corpus", "Write deterministic synthetic PGM images");
  std::string synth_out;
  int synth_count = 50, synth_w = 448, synth_h = 320;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--count", synth_count, "Number of images")->capture_default_str();
  synth->add_option("--width", synth_w, "Image width")->capture_default_str();
  synth->add_option("--height", synth_h, "Image height")->capture_default_str();
  std::string synth_texture = "smooth";
  synth->add_option("--texture", synth_texture, "Texture preset")
      ->check(CLI::IsMember({"smooth", "rough"}))
      ->capture_default_str();

  // q-pool
  auto* qpool = app.add_subcommand("q-pool", "Write a Q-matrix pool file");
  std::string qpool_out;
  int qpool_count = 20, qpool_min = 75, qpool_max = 98;
  std::vector<int> qpool_standard;
  qpool->add_option("--out", qpool_out, "Output file")->required();
  qpool->add_option("--count", qpool_count, "Jittered custom matrices")->capture_default_str();
  qpool->add_option("--min-quality", qpool_min, "Lowest base quality")->capture_default_str();
  qpool->add_option("--max-quality", qpool_max, "Highest base quality")->capture_default_str();
  qpool->add_option("--standard", qpool_standard,
                    "Standard tables at these qualities instead")->delimiter(',');

  // gen-dataset
  auto* gen = app.add_subcommand("gen-dataset", "Cut, compress and label patches");
  std::string gen_raw, gen_pool, gen_out;
  data::DatasetConfig gen_cfg;
  bool gen_jpeg = false, gen_no_unseen = false;
  gen->add_option("--raw", gen_raw, "Directory of PGM/PPM images")->required();
  gen->add_option("--q-pool", gen_pool, "Q-matrix pool file")->required();
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--patch-size", gen_cfg.patch_size, "Patch side")
      ->check(CLI::IsMember({64, 128, 256}))
      ->capture_default_str();
  gen->add_option("--source-size", gen_cfg.source_size,
                  "Compressed source side (0 = compress patches directly)")
      ->capture_default_str();
  gen->add_option("--max-patches", gen_cfg.max_patches_per_image,
                  "Patches per image (0 = all)")->capture_default_str();
  gen->add_option("--seen-fraction", gen_cfg.seen_fraction, "Seen share of the Q-pool")
      ->capture_default_str();
  gen->add_option("--train-fraction", gen_cfg.train_fraction)->capture_default_str();
  gen->add_option("--val-fraction", gen_cfg.val_fraction)->capture_default_str();
  gen->add_flag("--no-unseen", gen_no_unseen, "Skip the unseen-Q test split");
  gen->add_flag("--jpeg", gen_jpeg, "Store patches as baseline JPEG files");

  // features
  auto* feat = app.add_subcommand("features", "Extract histogram features per split");
  std::string feat_manifest, feat_out, feat_order = "raster";
  int feat_b = 80;
  feat->add_option("--manifest", feat_manifest, "Dataset manifest.jsonl")->required();
  feat->add_option("--out", feat_out, "Output directory")->required();
  feat->add_option("--bin-range,-b", feat_b, "Histogram bins span [-b, b]")->capture_default_str();
  feat->add_option("--order", feat_order, "raster or zigzag")->capture_default_str();

  // train
  auto* trn = app.add_subcommand("train", "Train a detector");
  ModelFlags trn_model;
  TrainFlags trn_flags;
  std::string trn_manifest, trn_features, trn_out, trn_log;
  trn_model.add_to(trn);
  trn_flags.add_to(trn);
  trn->add_option("--manifest", trn_manifest, "Dataset manifest.jsonl");
  trn->add_option("--features", trn_features, "Directory written by 'features'");
  trn->add_option("--out", trn_out, "Checkpoint path")->required();
  trn->add_option("--log", trn_log, "Epoch log (JSON lines); default stdout");

  // eval
  auto* evl = app.add_subcommand("eval", "Evaluate a checkpoint on one split");
  std::string evl_ckpt, evl_manifest, evl_features, evl_split = "test", evl_roc;
  double evl_threshold = 0.5;
  evl->add_option("--checkpoint", evl_ckpt)->required();
  evl->add_option("--manifest", evl_manifest, "Dataset manifest.jsonl");
  evl->add_option("--features", evl_features, "Directory written by 'features'");
  evl->add_option("--split", evl_split, "train, val, test or test_unseen")->capture_default_str();
  evl->add_option("--threshold", evl_threshold)->capture_default_str();
  evl->add_option("--roc", evl_roc, "Write the ROC curve as CSV");

  // predict
  auto* pred = app.add_subcommand("predict", "Score JPEG files");
  std::string pred_ckpt;
  std::vector<std::string> pred_files;
  double pred_threshold = 0.5;
  pred->add_option("--checkpoint", pred_ckpt)->required();
  pred->add_option("--threshold", pred_threshold)->capture_default_str();
  pred->add_option("files", pred_files, "JPEG or .djpg files")->required();

  // pmf
  auto* pmf = app.add_subcommand("pmf", "Analytic or sampled quantized-coefficient PMF");
  int pmf_q1 = 0;
  std::optional<int> pmf_q2;
  std::string pmf_family = "laplacian", pmf_out;
  double pmf_p0 = 0.0, pmf_p1 = 10.0;
  int pmf_lo = quant::kDefaultSupport.lo, pmf_hi = quant::kDefaultSupport.hi;
  std::int64_t pmf_samples = 0;
  pmf->add_option("q1", pmf_q1, "First quantization step")->required();
  pmf->add_option("q2", pmf_q2, "Second quantization step");
  pmf->add_option("--density", pmf_family, "uniform, gaussian or laplacian")
      ->capture_default_str();
  pmf->add_option("--p0", pmf_p0, "Location (or lower bound for uniform)")->capture_default_str();
  pmf->add_option("--p1", pmf_p1, "Scale (or upper bound for uniform)")->capture_default_str();
  pmf->add_option("--min", pmf_lo, "Lowest output value")->capture_default_str();
  pmf->add_option("--max", pmf_hi, "Highest output value")->capture_default_str();
  pmf->add_option("--samples", pmf_samples, "Monte-Carlo draws instead of the analytic model");
  pmf->add_option("--out", pmf_out, "CSV path (default stdout)");

  // inspect
  auto* insp = app.add_subcommand("inspect", "Dump frame info, Q-matrices and histograms");
  std::string insp_file;
  int insp_b = 20, insp_rows = 15;
  insp->add_option("file", insp_file, "JPEG file")->required();
  insp->add_option("--bin-range,-b", insp_b)->capture_default_str();
  insp->add_option("--rows", insp_rows, "Frequencies to summarize")->capture_default_str();

  // experiment
  auto* exp = app.add_subcommand("experiment", "Train, then compare seen and unseen Q-matrices");
  ModelFlags exp_model;
  TrainFlags exp_flags;
  std::string exp_manifest, exp_out;
  exp_model.add_to(exp);
  exp_flags.add_to(exp);
  exp->add_option("--manifest", exp_manifest, "Dataset manifest.jsonl")->required();
  exp->add_option("--out", exp_out, "Output directory")->required();

  // params
  auto* prm = app.add_subcommand("params", "Count the parameters of a model configuration");
  ModelFlags prm_model;
  prm_model.add_to(prm);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error("UsageError", e.what());
    return kUsageExit;
  }

  try {
    const int t = util::resolve_threads(threads);
    if (*synth) return cmd_synth_corpus(synth_out, synth_count, synth_w, synth_h, synth_texture, seed);
    if (*qpool) {
      return cmd_q_pool(qpool_out, qpool_count, qpool_min, qpool_max, qpool_standard, seed);
    }
    if (*gen) {
      gen_cfg.seed = seed;
      gen_cfg.unseen_eval = !gen_no_unseen;
      return cmd_gen_dataset(gen_raw, gen_pool, gen_out, gen_cfg, gen_jpeg, t);
    }
    if (*feat) {
      require(feat_b >= 1, ErrorCode::kDomainError, "--bin-range must be positive");
      return cmd_features(feat_manifest, feat_out, feat_b, features::parse_order(feat_order), t);
    }
    if (*trn) {
      trn_flags.config.seed = seed;
      trn_flags.config.threads = t;
      return cmd_train(trn_manifest, trn_features, trn_model.resolve(), trn_flags.config,
                       trn_out, trn_log);
    }
    if (*evl) {
      return cmd_eval(evl_ckpt, evl_manifest, evl_features, evl_split, evl_threshold, evl_roc, t);
    }
    if (*pred) return cmd_predict(pred_ckpt, pred_files, pred_threshold, t);
    if (*pmf) {
      return cmd_pmf(pmf_q1, pmf_q2, make_density(pmf_family, pmf_p0, pmf_p1),
                     quant::IntRange{pmf_lo, pmf_hi}, pmf_samples, seed, pmf_out);
    }
    if (*insp) return cmd_inspect(insp_file, insp_b, insp_rows);
    if (*exp) {
      exp_flags.config.seed = seed;
      exp_flags.config.threads = t;
      return cmd_experiment(exp_manifest, exp_model.resolve(), exp_flags.config, exp_out);
    }
    if (*prm) return cmd_params(prm_model.resolve());
  } catch (const Error& e) {
    print_error(e.name(), e.detail());
    return kFailureExit;
  } catch (const fs::filesystem_error& e) {
    print_error(error_code_name(ErrorCode::kIoError), e.what());
    return kFailureExit;
  } catch (const std::exception& e) {
    print_error("InternalError", e.what());
    return kFailureExit;
  }
  return kUsageExit;
}
