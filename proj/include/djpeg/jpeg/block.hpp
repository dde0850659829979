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

#ifndef DJPEG_JPEG_BLOCK_HPP_
#define DJPEG_JPEG_BLOCK_HPP_

#include <array>
#include <cstdint>
#include <vector>

#include "djpeg/jpeg/quant_matrix.hpp"

namespace djpeg::jpeg {

// Quantized coefficients of one 8x8 block, raster order. Stored wider than
// the 16-bit baseline bound so that out-of-range input can be reported.
using CoeffBlock = std::array<std::int32_t, kBlockArea>;
using PixelBlock = std::array<std::uint8_t, kBlockArea>;

// Grid of quantized coefficient blocks for one image component.
struct CoeffPlane {
  int component_id = 1;
  int width_blocks = 0;
  int height_blocks = 0;
  std::vector<CoeffBlock> blocks;  // raster block order

  CoeffPlane() = default;
  CoeffPlane(int width_blocks, int height_blocks, int component_id = 1);

  std::size_t block_count() const { return blocks.size(); }
  CoeffBlock& block(int bx, int by) { return blocks[by * width_blocks + bx]; }
  const CoeffBlock& block(int bx, int by) const {
    return blocks[by * width_blocks + bx];
  }

  // Top-left sub-grid of the given size in blocks.
  CoeffPlane crop_blocks(int width_blocks, int height_blocks) const;

  bool operator==(const CoeffPlane&) const = default;
};

// Level shift, 2-D DCT-II with the JPEG normalization, elementwise division
// by q and rounding half away from zero.
CoeffBlock forward_block(const PixelBlock& pixels, const QuantMatrix& q);

// Dequantization, inverse DCT, +128, rounding to nearest and clamping to
// [0, 255].
PixelBlock inverse_block(const CoeffBlock& coeffs, const QuantMatrix& q);

// Unquantized DCT of a level-shifted block; exposed for oracles.
std::array<double, kBlockArea> dct_2d(const std::array<double, kBlockArea>& in);
std::array<double, kBlockArea> idct_2d(const std::array<double, kBlockArea>& in);

}  // namespace djpeg::jpeg

#endif  // DJPEG_JPEG_BLOCK_HPP_
