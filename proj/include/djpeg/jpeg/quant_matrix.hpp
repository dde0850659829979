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

#ifndef DJPEG_JPEG_QUANT_MATRIX_HPP_
#define DJPEG_JPEG_QUANT_MATRIX_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>

namespace djpeg::jpeg {

inline constexpr int kBlockDim = 8;
inline constexpr int kBlockArea = 64;
inline constexpr int kAcCount = 63;

// 8x8 table of q-factors in raster order: index = row * 8 + col, where row is
// the vertical frequency (k1 - 1) and col the horizontal one (k2 - 1).
class QuantMatrix {
 public:
  // All-ones table.
  QuantMatrix();
  // Throws DomainError unless every entry is in [1, 255].
  explicit QuantMatrix(std::span<const int> raster);

  static QuantMatrix filled(int step);

  // 0-based raster access.
  int at(int row, int col) const { return steps_[row * kBlockDim + col]; }
  int operator[](int raster_index) const { return steps_[raster_index]; }
  // 1-based scalar frequency k in [1, 64].
  int step(int k) const;

  const std::array<std::uint8_t, kBlockArea>& steps() const { return steps_; }

  // Throws DomainError for out-of-range values.
  void set(int raster_index, int step);

  bool operator==(const QuantMatrix&) const = default;

  // Eight lines of eight space-separated integers.
  std::string to_text() const;

 private:
  std::array<std::uint8_t, kBlockArea> steps_;
};

// k = (k1 - 1) * 8 + k2 with k1, k2 in [1, 8]. DomainError outside.
int freq_2d_to_1d(int k1, int k2);
// Inverse of freq_2d_to_1d for k in [1, 64]. DomainError outside.
std::pair<int, int> freq_1d_to_2d(int k);

// Conventional luminance base table scaled linearly by quality (1..100) and
// clamped to [1, 255], matching the reference IJG encoder.
QuantMatrix standard_qmatrix(int quality);
// Same scaling rule over the Annex K chrominance base table.
QuantMatrix standard_chroma_qmatrix(int quality);

// kZigzagToRaster[i] is the raster index of the i-th coefficient in the
// standard zig-zag scan.
extern const std::array<int, kBlockArea> kZigzagToRaster;
extern const std::array<int, kBlockArea> kRasterToZigzag;

}  // namespace djpeg::jpeg

#endif  // DJPEG_JPEG_QUANT_MATRIX_HPP_
