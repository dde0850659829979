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

// Labelled single/double-compressed patch generation, Q-matrix pools and
// dataset manifests.

#ifndef DJPEG_DATA_DATASET_HPP_
#define DJPEG_DATA_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "djpeg/data/image.hpp"
#include "djpeg/jpeg/block.hpp"
#include "djpeg/jpeg/quant_matrix.hpp"

namespace djpeg::data {

using jpeg::CoeffPlane;
using jpeg::QuantMatrix;

enum class Label : std::uint8_t { kSingle = 0, kDouble = 1 };
enum class Split : std::uint8_t { kTrain, kVal, kTest, kTestUnseen };

std::string_view label_name(Label label);
std::string_view split_name(Split split);
Split parse_split(std::string_view name);

// Forward DCT and quantization of every block. DimensionError unless both
// dimensions are positive multiples of 8.
CoeffPlane single_compress(const GrayImage& patch, const QuantMatrix& q1);

// single_compress with q1, decompression to 8-bit pixels (rounding and
// clamping), then single_compress with q2. SameMatrixError if q1 == q2.
CoeffPlane double_compress(const GrayImage& patch, const QuantMatrix& q1,
                           const QuantMatrix& q2);

// Pixel reconstruction of a plane, used between the two passes.
GrayImage decompress(const CoeffPlane& plane, const QuantMatrix& q);

// Q-pool text format: each matrix is 8 lines of 8 integers in raster order;
// matrices are separated by blank lines; '#' starts a comment.
std::vector<QuantMatrix> parse_q_pool(std::string_view text);
std::string format_q_pool(std::span<const QuantMatrix> pool);
std::vector<QuantMatrix> read_q_pool(const std::filesystem::path& path);
void write_q_pool(const std::filesystem::path& path, std::span<const QuantMatrix> pool);

// First occurrence of each distinct matrix, in input order.
std::vector<QuantMatrix> dedupe_pool(std::span<const QuantMatrix> pool);

// Standard luminance tables for the given quality factors.
std::vector<QuantMatrix> standard_q_pool(std::span<const int> qualities);

// Camera-style custom tables: a standard table at a random quality with
// per-frequency multiplicative jitter. Deterministic in `seed`; distinct.
std::vector<QuantMatrix> custom_q_pool(int count, int min_quality, int max_quality,
                                       std::uint64_t seed);

struct QPoolSplit {
  std::vector<int> seen;    // indices into the deduplicated pool
  std::vector<int> unseen;
  std::vector<QuantMatrix> pool;  // the deduplicated pool
};

// Disjoint, exhaustive partition with round(seen_fraction * N) seen
// matrices. DomainError unless 0 < seen_fraction < 1 and the pool holds at
// least two distinct matrices.
QPoolSplit split_q_pool(std::span<const QuantMatrix> pool, double seen_fraction,
                        std::uint64_t seed);

struct PatchRecord {
  std::int64_t id = 0;
  Label label = Label::kSingle;
  int source_image = 0;
  std::int64_t source_patch = 0;  // index of the uncompressed patch
  int x = 0;                      // pixel offset in the source image
  int y = 0;
  QuantMatrix q1;
  std::optional<QuantMatrix> q2;
  int q1_index = -1;  // position in the deduplicated pool
  int q2_index = -1;
  Split split = Split::kTrain;
  std::string path;  // stored patch, relative to the manifest directory

  const QuantMatrix& final_q() const { return q2 ? *q2 : q1; }
  bool operator==(const PatchRecord&) const = default;
};

struct DatasetConfig {
  int patch_size = 64;
  // Size of the compressed source patch; the coefficient plane is cropped to
  // its top-left patch_size sub-grid. 0 compresses patches natively.
  int source_size = 256;
  int max_patches_per_image = 0;  // 0 keeps every patch
  double train_fraction = 0.8;
  double val_fraction = 0.1;
  double seen_fraction = 0.7;
  bool unseen_eval = true;
  std::uint64_t seed = 1;

  bool operator==(const DatasetConfig&) const = default;
};

struct DatasetManifest {
  DatasetConfig config;
  std::vector<std::string> sources;
  std::vector<QuantMatrix> pool;
  std::vector<int> seen_pool;
  std::vector<int> unseen_pool;
  std::vector<PatchRecord> records;

  // One header line, then one line per record.
  std::string to_jsonl() const;
  static DatasetManifest from_jsonl(std::string_view text);
  // FNV-1a over the serialized manifest.
  std::uint64_t digest() const;

  std::vector<std::size_t> indices(Split split) const;
  bool operator==(const DatasetManifest&) const = default;
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<CoeffPlane> planes;  // aligned with manifest.records
};

struct NamedImage {
  std::string name;
  GrayImage image;
};

// One single- and one double-compressed instance per source patch, both in
// the same split. With unseen_eval the train, val and test splits draw from
// the seen pool and every test source patch is repeated in kTestUnseen with
// matrices from the unseen pool. EmptyCorpus when no patch can be cut,
// InsufficientQPool when a pool side has fewer than two matrices. The output
// does not depend on `threads`.
Dataset build_dataset(std::span<const NamedImage> images,
                      std::span<const QuantMatrix> pool, const DatasetConfig& config,
                      int threads = 1);

// Loads every .pgm/.ppm/.pnm file in the directory, sorted by name.
std::vector<NamedImage> load_corpus(const std::filesystem::path& dir);

enum class StorageFormat { kCoefficients, kJpeg };

// Packed coefficient file: "DJPG", u32 version, u32 width and height in
// blocks, 64 q-factors (raster), then int16 coefficients, little-endian.
std::vector<std::uint8_t> encode_djpg(const CoeffPlane& plane, const QuantMatrix& q);
CoeffPlane decode_djpg(std::span<const std::uint8_t> bytes, QuantMatrix* q = nullptr);

// Writes manifest.jsonl and one file per record under patches/, filling in
// record paths.
void write_dataset(const std::filesystem::path& dir, Dataset& dataset,
                   StorageFormat format);
DatasetManifest read_manifest(const std::filesystem::path& manifest_path);
// Loads the coefficients of a stored record (either format).
CoeffPlane load_patch(const std::filesystem::path& base_dir, const PatchRecord& record);

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes,
                      std::uint64_t hash = 0xCBF29CE484222325ULL);

}  // namespace djpeg::data

#endif  // DJPEG_DATA_DATASET_HPP_
