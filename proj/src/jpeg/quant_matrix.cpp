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

#include "djpeg/jpeg/quant_matrix.hpp"

#include <algorithm>
#include <sstream>

#include "djpeg/error.hpp"

namespace djpeg::jpeg {
namespace {

// ITU-T T.81 Annex K, tables K.1 and K.2 (raster order).
constexpr std::array<int, kBlockArea> kLumaBase = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99,
};

constexpr std::array<int, kBlockArea> kChromaBase = {
    17, 18, 24, 47, 99, 99, 99, 99,  //
    18, 21, 26, 66, 99, 99, 99, 99,  //
    24, 26, 56, 99, 99, 99, 99, 99,  //
    47, 66, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,
};

void check_step(int step) {
  require(step >= 1 && step <= 255, ErrorCode::kDomainError,
          "q-factor out of [1,255]: " + std::to_string(step));
}

QuantMatrix scale_table(const std::array<int, kBlockArea>& base, int quality) {
  require(quality >= 1 && quality <= 100, ErrorCode::kDomainError,
          "quality out of [1,100]: " + std::to_string(quality));
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  std::array<int, kBlockArea> out{};
  for (int i = 0; i < kBlockArea; ++i) {
    out[i] = std::clamp((base[i] * scale + 50) / 100, 1, 255);
  }
  return QuantMatrix(out);
}

constexpr std::array<int, kBlockArea> make_zigzag() {
  std::array<int, kBlockArea> order{};
  int idx = 0;
  for (int diag = 0; diag < 2 * kBlockDim - 1; ++diag) {
    // Even diagonals run bottom-left to top-right, odd ones the reverse.
    for (int step = 0; step <= diag; ++step) {
      const int row = (diag % 2 == 0) ? diag - step : step;
      const int col = diag - row;
      if (row < kBlockDim && col < kBlockDim) order[idx++] = row * kBlockDim + col;
    }
  }
  return order;
}

constexpr std::array<int, kBlockArea> invert(const std::array<int, kBlockArea>& perm) {
  std::array<int, kBlockArea> inv{};
  for (int i = 0; i < kBlockArea; ++i) inv[perm[i]] = i;
  return inv;
}

}  // namespace

constinit const std::array<int, kBlockArea> kZigzagToRaster = make_zigzag();
constinit const std::array<int, kBlockArea> kRasterToZigzag =
    invert(make_zigzag());

QuantMatrix::QuantMatrix() { steps_.fill(1); }

QuantMatrix::QuantMatrix(std::span<const int> raster) {
  require(raster.size() == kBlockArea, ErrorCode::kDomainError,
          "Q-matrix needs 64 entries, got " + std::to_string(raster.size()));
  for (int i = 0; i < kBlockArea; ++i) {
    check_step(raster[i]);
    steps_[i] = static_cast<std::uint8_t>(raster[i]);
  }
}

QuantMatrix QuantMatrix::filled(int step) {
  check_step(step);
  QuantMatrix q;
  q.steps_.fill(static_cast<std::uint8_t>(step));
  return q;
}

int QuantMatrix::step(int k) const {
  const auto [k1, k2] = freq_1d_to_2d(k);
  return at(k1 - 1, k2 - 1);
}

void QuantMatrix::set(int raster_index, int step) {
  require(raster_index >= 0 && raster_index < kBlockArea,
          ErrorCode::kDomainError, "raster index out of range");
  check_step(step);
  steps_[raster_index] = static_cast<std::uint8_t>(step);
}

std::string QuantMatrix::to_text() const {
  std::ostringstream out;
  for (int r = 0; r < kBlockDim; ++r) {
    for (int c = 0; c < kBlockDim; ++c) {
      if (c) out << ' ';
      out << at(r, c);
    }
    out << '\n';
  }
  return out.str();
}

int freq_2d_to_1d(int k1, int k2) {
  require(k1 >= 1 && k1 <= 8 && k2 >= 1 && k2 <= 8, ErrorCode::kDomainError,
          "2-D frequency out of {1..8}^2");
  return (k1 - 1) * 8 + k2;
}

std::pair<int, int> freq_1d_to_2d(int k) {
  require(k >= 1 && k <= 64, ErrorCode::kDomainError,
          "scalar frequency out of [1,64]: " + std::to_string(k));
  if (k % 8 == 0) return {k / 8, 8};
  return {k / 8 + 1, k % 8};
}

QuantMatrix standard_qmatrix(int quality) { return scale_table(kLumaBase, quality); }

QuantMatrix standard_chroma_qmatrix(int quality) {
  return scale_table(kChromaBase, quality);
}

}  // namespace djpeg::jpeg
