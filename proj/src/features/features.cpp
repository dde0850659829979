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

#include "djpeg/features/features.hpp"

#include <cstring>
#include <string>

#include "djpeg/error.hpp"
#include "djpeg/jpeg/codec.hpp"
#include "djpeg/util/bytes.hpp"

namespace djpeg::features {
namespace {

constexpr std::uint32_t kVersion = 1;
constexpr int kMaxB = 1024;

std::array<int, kAcCount> make_positions(FreqOrder order) {
  std::array<int, kAcCount> out{};
  for (int f = 0; f < kAcCount; ++f) {
    out[f] = order == FreqOrder::kRaster ? f + 1 : jpeg::kZigzagToRaster[f + 1];
  }
  return out;
}

}  // namespace

std::string_view order_name(FreqOrder order) {
  return order == FreqOrder::kZigzag ? "zigzag" : "raster";
}

FreqOrder parse_order(std::string_view name) {
  if (name == "raster") return FreqOrder::kRaster;
  if (name == "zigzag") return FreqOrder::kZigzag;
  fail(ErrorCode::kConfigError, "unknown frequency order '" + std::string(name) + "'");
}

const std::array<int, kAcCount>& ac_positions(FreqOrder order) {
  static const std::array<int, kAcCount> raster = make_positions(FreqOrder::kRaster);
  static const std::array<int, kAcCount> zigzag = make_positions(FreqOrder::kZigzag);
  return order == FreqOrder::kZigzag ? zigzag : raster;
}

HistogramSet::HistogramSet(int b_, FreqOrder order_)
    : b(b_), order(order_), counts(static_cast<std::size_t>(kAcCount) * (2 * b_ + 1), 0) {}

std::uint64_t HistogramSet::total() const {
  std::uint64_t s = 0;
  for (auto c : counts) s += c;
  return s;
}

HistogramSet extract_histograms(const CoeffPlane& plane, int b) {
  require(b >= 1 && b <= kMaxB, ErrorCode::kDomainError,
          "bin range must lie in [1, " + std::to_string(kMaxB) + "]");
  HistogramSet h(b, FreqOrder::kRaster);
  for (const auto& block : plane.blocks) {
    for (int f = 0; f < kAcCount; ++f) {
      const int v = block[f + 1];
      if (v >= -b && v <= b) ++h.at(f, v);
    }
  }
  return h;
}

HQInput assemble_hq(const HistogramSet& h, const QuantMatrix& q, FreqOrder order) {
  require(h.counts.size() == static_cast<std::size_t>(kAcCount) * h.bins(),
          ErrorCode::kShapeError, "histogram set has the wrong size");
  const auto& src = ac_positions(h.order);
  const auto& dst = ac_positions(order);
  // Row of h holding each raster position.
  std::array<int, jpeg::kBlockArea> row_of{};
  for (int f = 0; f < kAcCount; ++f) row_of[src[f]] = f;

  HQInput out{h.b, order, std::vector<double>(static_cast<std::size_t>(kAcCount) * h.bins() * 2)};
  for (int f = 0; f < kAcCount; ++f) {
    const int pos = dst[f];
    const int from = row_of[pos];
    const double qf = q[pos];
    for (int i = 0; i < h.bins(); ++i) {
      out.values[HQInput::index(h.b, f, i, 0)] = h.counts[from * h.bins() + i];
      out.values[HQInput::index(h.b, f, i, 1)] = qf;
    }
  }
  return out;
}

FeatureSet::FeatureSet(int b_, FreqOrder order_) : b(b_), order(order_) {
  require(b_ >= 1 && b_ <= kMaxB, ErrorCode::kDomainError, "bin range out of range");
}

void FeatureSet::add(const HistogramSet& h, const QuantMatrix& q, std::uint8_t label) {
  require(h.b == b, ErrorCode::kShapeError, "histogram bin range differs from the set");
  require(label <= 1, ErrorCode::kDomainError, "labels must be 0 or 1");
  if (h.order == order) {
    counts.insert(counts.end(), h.counts.begin(), h.counts.end());
  } else {
    const HQInput x = assemble_hq(h, q, order);
    for (int f = 0; f < kAcCount; ++f) {
      for (int i = 0; i < h.bins(); ++i) {
        counts.push_back(static_cast<std::uint32_t>(x.at(f, i, 0)));
      }
    }
  }
  qs.push_back(q);
  labels.push_back(label);
}

HistogramSet FeatureSet::histograms(std::size_t i) const {
  HistogramSet h(b, order);
  std::copy_n(counts.begin() + i * row_size(), row_size(), h.counts.begin());
  return h;
}

HQInput FeatureSet::hq(std::size_t i) const {
  HQInput out{b, order, std::vector<double>(row_size() * 2)};
  fill_hq(i, out.values);
  return out;
}

void FeatureSet::fill_hq(std::size_t i, std::span<double> out) const {
  require(out.size() == row_size() * 2, ErrorCode::kShapeError, "HQ buffer size mismatch");
  const auto& pos = ac_positions(order);
  const std::uint32_t* row = counts.data() + i * row_size();
  const int bins = 2 * b + 1;
  for (int f = 0; f < kAcCount; ++f) {
    const double qf = qs[i][pos[f]];
    for (int k = 0; k < bins; ++k) {
      out[(f * bins + k) * 2] = row[f * bins + k];
      out[(f * bins + k) * 2 + 1] = qf;
    }
  }
}

FeatureSet FeatureSet::subset(std::span<const std::size_t> indices) const {
  FeatureSet out(b, order);
  for (std::size_t i : indices) {
    require(i < size(), ErrorCode::kShapeError, "subset index out of range");
    out.counts.insert(out.counts.end(), counts.begin() + i * row_size(),
                      counts.begin() + (i + 1) * row_size());
    out.qs.push_back(qs[i]);
    out.labels.push_back(labels[i]);
  }
  return out;
}

std::vector<std::uint8_t> encode_features(const FeatureSet& set) {
  std::vector<std::uint8_t> out = {'D', 'J', 'P', 'F'};
  util::put_le(out, kVersion, 4);
  util::put_le(out, static_cast<std::uint32_t>(set.b), 4);
  util::put_le(out, static_cast<std::uint8_t>(set.order), 1);
  util::put_le(out, set.size(), 8);
  out.reserve(out.size() + set.size() * (1 + set.row_size() * 4 + 64));
  for (std::size_t r = 0; r < set.size(); ++r) {
    out.push_back(set.labels[r]);
    for (std::size_t k = 0; k < set.row_size(); ++k) {
      util::put_le(out, set.counts[r * set.row_size() + k], 4);
    }
    for (int i = 0; i < jpeg::kBlockArea; ++i) out.push_back(set.qs[r][i]);
  }
  return out;
}

FeatureSet decode_features(std::span<const std::uint8_t> bytes) {
  require(bytes.size() >= 4 && std::memcmp(bytes.data(), "DJPF", 4) == 0,
          ErrorCode::kFormatError, "not a DJPF feature file");
  util::ByteReader in(bytes.subspan(4), "feature file");
  require(in.get(4) == kVersion, ErrorCode::kFormatError, "unsupported DJPF version");
  const auto b = static_cast<int>(in.get(4));
  const auto order = in.get(1);
  require(b >= 1 && b <= kMaxB && order <= 1, ErrorCode::kFormatError,
          "bad DJPF header");
  FeatureSet set(b, static_cast<FreqOrder>(order));
  const std::uint64_t n = in.get(8);
  const std::size_t record_bytes = 1 + set.row_size() * 4 + jpeg::kBlockArea;
  require(n <= bytes.size() / record_bytes, ErrorCode::kFormatError,
          "DJPF record count exceeds file size");
  set.counts.reserve(n * set.row_size());
  for (std::uint64_t r = 0; r < n; ++r) {
    const auto label = static_cast<std::uint8_t>(in.get(1));
    require(label <= 1, ErrorCode::kFormatError, "bad DJPF label");
    set.labels.push_back(label);
    for (std::size_t k = 0; k < set.row_size(); ++k) {
      set.counts.push_back(static_cast<std::uint32_t>(in.get(4)));
    }
    std::vector<int> q(jpeg::kBlockArea);
    for (auto& v : q) v = static_cast<int>(in.get(1));
    try {
      set.qs.emplace_back(q);
    } catch (const Error& e) {
      fail(ErrorCode::kFormatError, e.detail());
    }
  }
  require(in.done(), ErrorCode::kFormatError, "trailing bytes in DJPF file");
  return set;
}

void write_features(const std::filesystem::path& path, const FeatureSet& set) {
  jpeg::write_file_bytes(path, encode_features(set));
}

FeatureSet read_features(const std::filesystem::path& path) {
  return decode_features(jpeg::read_file_bytes(path));
}

}  // namespace djpeg::features
