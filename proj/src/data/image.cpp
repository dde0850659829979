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

#include "djpeg/data/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "djpeg/error.hpp"
#include "djpeg/jpeg/codec.hpp"
#include "djpeg/util/rng.hpp"

namespace djpeg::data {
namespace {

class PnmReader {
 public:
  explicit PnmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  // Next whitespace-separated header token; '#' starts a comment.
  std::string token() {
    for (;;) {
      while (pos_ < bytes_.size() && std::isspace(bytes_[pos_])) ++pos_;
      if (pos_ < bytes_.size() && bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
        continue;
      }
      break;
    }
    std::string out;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) && bytes_[pos_] != '#') {
      out.push_back(static_cast<char>(bytes_[pos_++]));
    }
    require(!out.empty(), ErrorCode::kFormatError, "truncated PNM header");
    return out;
  }

  int number() {
    const std::string t = token();
    require(t.size() <= 9 && std::all_of(t.begin(), t.end(), ::isdigit),
            ErrorCode::kFormatError, "bad PNM number '" + t + "'");
    return std::stoi(t);
  }

  // Skips the single whitespace byte that precedes binary raster data.
  void end_header() {
    require(pos_ < bytes_.size() && std::isspace(bytes_[pos_]), ErrorCode::kFormatError,
            "missing PNM raster separator");
    ++pos_;
  }

  std::uint8_t byte() {
    require(pos_ < bytes_.size(), ErrorCode::kFormatError, "truncated PNM raster");
    return bytes_[pos_++];
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

// One octave of bilinear value noise on a lattice with the given cell size.
void add_value_noise(std::vector<double>& field, int width, int height, double cell,
                     double amplitude, std::mt19937_64& rng) {
  const int gw = static_cast<int>(width / cell) + 2;
  const int gh = static_cast<int>(height / cell) + 2;
  std::vector<double> lattice(static_cast<std::size_t>(gw) * gh);
  for (auto& v : lattice) v = util::uniform(rng, -1.0, 1.0);
  for (int y = 0; y < height; ++y) {
    const double fy = y / cell;
    const int iy = static_cast<int>(fy);
    const double ty = smoothstep(fy - iy);
    for (int x = 0; x < width; ++x) {
      const double fx = x / cell;
      const int ix = static_cast<int>(fx);
      const double tx = smoothstep(fx - ix);
      const double a = lattice[iy * gw + ix];
      const double b = lattice[iy * gw + ix + 1];
      const double c = lattice[(iy + 1) * gw + ix];
      const double d = lattice[(iy + 1) * gw + ix + 1];
      const double top = a + (b - a) * tx;
      const double bottom = c + (d - c) * tx;
      field[y * width + x] += amplitude * (top + (bottom - top) * ty);
    }
  }
}

}  // namespace

GrayImage::GrayImage(int w, int h, std::uint8_t fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {
  require(w >= 0 && h >= 0, ErrorCode::kDimensionError, "negative image size");
}

GrayImage GrayImage::crop(int x, int y, int w, int h) const {
  require(x >= 0 && y >= 0 && w >= 0 && h >= 0 && x + w <= width && y + h <= height,
          ErrorCode::kDimensionError, "crop rectangle leaves the image");
  GrayImage out(w, h);
  for (int r = 0; r < h; ++r) {
    std::copy_n(pixels.begin() + (y + r) * width + x, w, out.pixels.begin() + r * w);
  }
  return out;
}

GrayImage GrayImage::crop_to_blocks() const {
  return crop(0, 0, width / 8 * 8, height / 8 * 8);
}

std::uint8_t rgb_to_luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const double y = 0.299 * r + 0.587 * g + 0.114 * b;
  return static_cast<std::uint8_t>(std::clamp(std::lround(y), 0L, 255L));
}

GrayImage decode_pnm(std::span<const std::uint8_t> bytes) {
  PnmReader in(bytes);
  const std::string magic = in.token();
  require(magic == "P2" || magic == "P3" || magic == "P5" || magic == "P6",
          ErrorCode::kFormatError, "unsupported PNM type '" + magic + "'");
  const int width = in.number();
  const int height = in.number();
  const int maxval = in.number();
  require(width >= 1 && height >= 1 && width <= 65535 && height <= 65535,
          ErrorCode::kFormatError, "PNM dimensions out of range");
  require(maxval >= 1 && maxval <= 255, ErrorCode::kFormatError,
          "only 8-bit PNM is supported");
  const bool ascii = magic == "P2" || magic == "P3";
  const bool color = magic == "P3" || magic == "P6";
  if (!ascii) in.end_header();
  auto sample = [&] {
    const int v = ascii ? in.number() : in.byte();
    require(v <= maxval, ErrorCode::kFormatError, "PNM sample exceeds maxval");
    return static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
  };
  GrayImage out(width, height);
  for (auto& p : out.pixels) {
    if (color) {
      const std::uint8_t r = sample();
      const std::uint8_t g = sample();
      const std::uint8_t b = sample();
      p = rgb_to_luma(r, g, b);
    } else {
      p = sample();
    }
  }
  return out;
}

GrayImage read_pnm(const std::filesystem::path& path) {
  return decode_pnm(jpeg::read_file_bytes(path));
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& image) {
  const std::string header = "P5\n" + std::to_string(image.width) + " " +
                             std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  jpeg::write_file_bytes(path, encode_pgm(image));
}

GrayImage synthesize_image(int width, int height, std::uint64_t seed,
                           const SynthTexture& texture) {
  require(width >= 1 && height >= 1, ErrorCode::kDimensionError,
          "image dimensions must be positive");
  require(texture.roughness_lo > 0.0 && texture.roughness_lo <= texture.roughness_hi &&
              texture.sensor_lo >= 0.0 && texture.sensor_lo <= texture.sensor_hi,
          ErrorCode::kConfigError, "invalid texture ranges");
  std::mt19937_64 rng(util::derive_seed(seed, 0x1A6E));
  std::vector<double> field(static_cast<std::size_t>(width) * height, 0.0);

  // Roughly 1/f spectrum: amplitude halves with the cell size.
  const double roughness = util::uniform(rng, texture.roughness_lo, texture.roughness_hi);
  double amplitude = util::uniform(rng, 50.0, 80.0);
  for (double cell = 128.0; cell >= 2.0; cell /= 2.0) {
    add_value_noise(field, width, height, cell, amplitude, rng);
    amplitude *= roughness;
  }

  const double gx = util::uniform(rng, -0.3, 0.3);
  const double gy = util::uniform(rng, -0.3, 0.3);
  const int shapes = 3 + static_cast<int>(util::below(rng, 6));
  struct Shape {
    bool disc;
    double cx, cy, rx, ry, level;
  };
  std::vector<Shape> drawn;
  for (int s = 0; s < shapes; ++s) {
    drawn.push_back({util::uniform01(rng) < 0.5, util::uniform(rng, 0, width),
                     util::uniform(rng, 0, height), util::uniform(rng, 6, width / 3.0 + 6),
                     util::uniform(rng, 6, height / 3.0 + 6),
                     util::uniform(rng, -70.0, 70.0)});
  }
  const double base = util::uniform(rng, 90.0, 160.0);
  const double sensor = util::uniform(rng, texture.sensor_lo, texture.sensor_hi);

  GrayImage out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double v = base + field[y * width + x] + gx * (x - width / 2.0) +
                 gy * (y - height / 2.0);
      for (const Shape& s : drawn) {
        const double dx = (x - s.cx) / s.rx;
        const double dy = (y - s.cy) / s.ry;
        const bool inside = s.disc ? dx * dx + dy * dy <= 1.0
                                   : std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
        if (inside) v += s.level;
      }
      v += sensor * util::normal(rng);
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return out;
}

}  // namespace djpeg::data
