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

#ifndef DJPEG_DATA_IMAGE_HPP_
#define DJPEG_DATA_IMAGE_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace djpeg::data {

// 8-bit single-channel raster, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0);

  std::uint8_t at(int x, int y) const { return pixels[y * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[y * width + x]; }

  // Copy of the rectangle at (x, y); DimensionError if it leaves the image.
  GrayImage crop(int x, int y, int w, int h) const;
  // Crops right and bottom edges to the largest multiple of 8.
  GrayImage crop_to_blocks() const;

  bool operator==(const GrayImage&) const = default;
};

// Full-range BT.601 luma, Y = 0.299 R + 0.587 G + 0.114 B, rounded.
std::uint8_t rgb_to_luma(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// Reads binary or ASCII PGM/PPM (P2, P3, P5, P6) with maxval <= 255; colour
// input is converted to luma. FormatError on anything else, IoError if the
// file cannot be read.
GrayImage read_pnm(const std::filesystem::path& path);
GrayImage decode_pnm(std::span<const std::uint8_t> bytes);

// Binary PGM (P5).
std::vector<std::uint8_t> encode_pgm(const GrayImage& image);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

// Ranges the per-image texture parameters are drawn from. Octave amplitude
// is multiplied by `roughness` per halving of the cell size.
struct SynthTexture {
  double roughness_lo = 0.45, roughness_hi = 0.75;
  double sensor_lo = 0.8, sensor_hi = 3.0;

  static SynthTexture smooth() { return {}; }
  // More fine-scale energy and sensor noise; denser AC histograms.
  static SynthTexture rough() { return {0.7, 0.9, 2.0, 6.0}; }
};

// Deterministic natural-looking test image: multi-octave value noise, a few
// hard-edged shapes, a gradient and Gaussian sensor noise.
GrayImage synthesize_image(int width, int height, std::uint64_t seed,
                           const SynthTexture& texture = SynthTexture::smooth());

}  // namespace djpeg::data

#endif  // DJPEG_DATA_IMAGE_HPP_
