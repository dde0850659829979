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

// Baseline sequential Huffman JPEG at the quantized-coefficient level. The
// parser stops after entropy decoding: no dequantization, no IDCT.

#ifndef DJPEG_JPEG_CODEC_HPP_
#define DJPEG_JPEG_CODEC_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "djpeg/jpeg/block.hpp"
#include "djpeg/jpeg/quant_matrix.hpp"

namespace djpeg::jpeg {

struct ComponentInfo {
  int id = 1;
  int h_sampling = 1;
  int v_sampling = 1;
  int quant_table_id = 0;

  bool operator==(const ComponentInfo&) const = default;
};

// Only single-component or 3-component 4:4:4 frames are accepted.
struct FrameInfo {
  int width = 0;
  int height = 0;
  std::vector<ComponentInfo> components;

  int component_count() const { return static_cast<int>(components.size()); }
  int width_blocks() const { return (width + 7) / 8; }
  int height_blocks() const { return (height + 7) / 8; }

  static FrameInfo grayscale(int width, int height);
  static FrameInfo ycbcr444(int width, int height);

  bool operator==(const FrameInfo&) const = default;
};

struct JpegCoefficients {
  FrameInfo frame;
  std::vector<QuantMatrix> qmatrices;  // one per component, frame order
  std::vector<CoeffPlane> planes;      // one per component, frame order
  int restart_interval = 0;            // 0 when no DRI segment was seen
};

// Errors: UnsupportedMarker (progressive, lossless, arithmetic, subsampled,
// 12-bit), CorruptBitstream (malformed segment or entropy data, truncation),
// MissingTable (a scan references an undefined DQT/DHT slot).
JpegCoefficients parse_jpeg(std::span<const std::uint8_t> bytes);

// Emits SOI, JFIF APP0, DQT, SOF0, the Annex K Huffman tables, one
// interleaved scan and EOI. Component i uses quantization table slot i.
// Throws CoefficientOutOfRange when an AC value exceeds 10 magnitude bits or
// a DC difference exceeds 11, and DimensionError when planes and frame
// disagree.
std::vector<std::uint8_t> encode_jpeg(std::span<const CoeffPlane> planes,
                                      std::span<const QuantMatrix> qmatrices,
                                      const FrameInfo& frame);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes);

}  // namespace djpeg::jpeg

#endif  // DJPEG_JPEG_CODEC_HPP_
