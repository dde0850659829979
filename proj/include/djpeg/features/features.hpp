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

// Network input: per-AC-frequency coefficient histograms paired with the
// q-factor of the final compression.

#ifndef DJPEG_FEATURES_FEATURES_HPP_
#define DJPEG_FEATURES_FEATURES_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "djpeg/jpeg/block.hpp"
#include "djpeg/jpeg/quant_matrix.hpp"

namespace djpeg::features {

using jpeg::CoeffPlane;
using jpeg::QuantMatrix;

inline constexpr int kAcCount = 63;

enum class FreqOrder : std::uint8_t { kRaster = 0, kZigzag = 1 };

std::string_view order_name(FreqOrder order);
// ConfigError for anything but "raster" or "zigzag".
FreqOrder parse_order(std::string_view name);

// Raster position (1..63) of the f-th AC frequency under `order`.
const std::array<int, kAcCount>& ac_positions(FreqOrder order);

// 63 x (2b+1) counts, frequency-major.
struct HistogramSet {
  int b = 0;
  FreqOrder order = FreqOrder::kRaster;
  std::vector<std::uint32_t> counts;

  HistogramSet() = default;
  HistogramSet(int b, FreqOrder order);

  int bins() const { return 2 * b + 1; }
  // Bin i in [-b, b] of the f-th frequency row.
  std::uint32_t at(int f, int i) const { return counts[f * bins() + i + b]; }
  std::uint32_t& at(int f, int i) { return counts[f * bins() + i + b]; }
  std::uint64_t total() const;

  bool operator==(const HistogramSet&) const = default;
};

// Counts of each AC coefficient value in [-b, b]; values outside are
// dropped. Rows are in raster order, k = 2..64. DomainError if b < 1.
HistogramSet extract_histograms(const CoeffPlane& plane, int b);

// Real-valued input tensor, layout [frequency][bin][channel] with channel 0
// the histogram count and channel 1 the q-factor.
struct HQInput {
  int b = 0;
  FreqOrder order = FreqOrder::kRaster;
  std::vector<double> values;

  int bins() const { return 2 * b + 1; }
  static std::size_t index(int b, int f, int bin, int channel) {
    return (static_cast<std::size_t>(f) * (2 * b + 1) + bin) * 2 + channel;
  }
  // `bin` is 0-based (bin 0 holds value -b).
  double at(int f, int bin, int channel) const { return values[index(b, f, bin, channel)]; }

  bool operator==(const HQInput&) const = default;
};

// Reorders rows to `order` if needed and pairs every row with its q-factor.
HQInput assemble_hq(const HistogramSet& h, const QuantMatrix& q, FreqOrder order);

// In-memory feature table: one histogram set, final Q-matrix and label per
// patch, all rows in the same order.
struct FeatureSet {
  int b = 0;
  FreqOrder order = FreqOrder::kRaster;
  std::vector<std::uint8_t> labels;  // 1 = double compressed
  std::vector<std::uint32_t> counts;
  std::vector<QuantMatrix> qs;

  FeatureSet() = default;
  FeatureSet(int b, FreqOrder order);

  std::size_t size() const { return labels.size(); }
  std::size_t row_size() const { return static_cast<std::size_t>(kAcCount) * (2 * b + 1); }
  // ShapeError if h disagrees with the set's b or order.
  void add(const HistogramSet& h, const QuantMatrix& q, std::uint8_t label);
  HistogramSet histograms(std::size_t i) const;
  HQInput hq(std::size_t i) const;
  // Writes the HQ tensor of record i into out (size row_size() * 2).
  void fill_hq(std::size_t i, std::span<double> out) const;
  FeatureSet subset(std::span<const std::size_t> indices) const;

  bool operator==(const FeatureSet&) const = default;
};

// Packed file: "DJPF", u32 version, u32 b, u8 order, u64 record count, then
// per record a label byte, 63 x (2b+1) u32 counts and 64 u8 q-factors in
// raster order. Little-endian.
std::vector<std::uint8_t> encode_features(const FeatureSet& set);
FeatureSet decode_features(std::span<const std::uint8_t> bytes);
void write_features(const std::filesystem::path& path, const FeatureSet& set);
FeatureSet read_features(const std::filesystem::path& path);

}  // namespace djpeg::features

#endif  // DJPEG_FEATURES_FEATURES_HPP_
