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

#include <cstdlib>
#include <fstream>
#include <string>

#include "djpeg/error.hpp"
#include "djpeg/jpeg/codec.hpp"
#include "djpeg/jpeg/huffman.hpp"

namespace djpeg::jpeg {
namespace {

constexpr int kMaxAcCategory = 10;
constexpr int kMaxDcCategory = 11;

class ByteWriter {
 public:
  void u8(int v) { out_.push_back(static_cast<std::uint8_t>(v)); }
  void u16(int v) {
    u8(v >> 8);
    u8(v & 0xFF);
  }
  void marker(int m) {
    u8(0xFF);
    u8(m);
  }
  std::vector<std::uint8_t>& bytes() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class BitWriter {
 public:
  explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void put(std::uint32_t bits, int count) {
    for (int i = count - 1; i >= 0; --i) {
      acc_ = static_cast<std::uint8_t>((acc_ << 1) | ((bits >> i) & 1));
      if (++filled_ == 8) emit();
    }
  }

  // Pads the final byte with one-bits.
  void flush() {
    while (filled_ != 0) {
      acc_ = static_cast<std::uint8_t>((acc_ << 1) | 1);
      if (++filled_ == 8) emit();
    }
  }

 private:
  void emit() {
    out_.push_back(acc_);
    if (acc_ == 0xFF) out_.push_back(0x00);
    acc_ = 0;
    filled_ = 0;
  }

  std::vector<std::uint8_t>& out_;
  std::uint8_t acc_ = 0;
  int filled_ = 0;
};

int category(int v) {
  int a = std::abs(v);
  int s = 0;
  while (a) {
    ++s;
    a >>= 1;
  }
  return s;
}

std::uint32_t magnitude_bits(int v, int s) {
  return static_cast<std::uint32_t>(v >= 0 ? v : v + (1 << s) - 1) &
         ((1u << s) - 1);
}

void write_dht(ByteWriter& w, const HuffmanTable& t) {
  w.marker(0xC4);
  w.u16(2 + 1 + 16 + static_cast<int>(t.symbols.size()));
  w.u8((static_cast<int>(t.cls) << 4) | t.id);
  for (auto c : t.counts) w.u8(c);
  for (auto s : t.symbols) w.u8(s);
}

void encode_block(BitWriter& bw, const CoeffBlock& block, int& predictor,
                  const HuffmanEncoder& dc, const HuffmanEncoder& ac) {
  const int diff = block[0] - predictor;
  predictor = block[0];
  const int t = category(diff);
  require(t <= kMaxDcCategory, ErrorCode::kCoefficientOutOfRange,
          "DC difference " + std::to_string(diff) + " exceeds baseline range");
  bw.put(dc.code[t], dc.length[t]);
  if (t) bw.put(magnitude_bits(diff, t), t);

  int run = 0;
  for (int k = 1; k < kBlockArea; ++k) {
    const int v = block[kZigzagToRaster[k]];
    if (v == 0) {
      ++run;
      continue;
    }
    while (run > 15) {
      bw.put(ac.code[0xF0], ac.length[0xF0]);
      run -= 16;
    }
    const int s = category(v);
    require(s <= kMaxAcCategory, ErrorCode::kCoefficientOutOfRange,
            "AC coefficient " + std::to_string(v) + " exceeds baseline range");
    const int rs = (run << 4) | s;
    bw.put(ac.code[rs], ac.length[rs]);
    bw.put(magnitude_bits(v, s), s);
    run = 0;
  }
  if (run > 0) bw.put(ac.code[0x00], ac.length[0x00]);
}

}  // namespace

FrameInfo FrameInfo::grayscale(int width, int height) {
  return FrameInfo{width, height, {ComponentInfo{1, 1, 1, 0}}};
}

FrameInfo FrameInfo::ycbcr444(int width, int height) {
  return FrameInfo{width,
                   height,
                   {ComponentInfo{1, 1, 1, 0}, ComponentInfo{2, 1, 1, 1},
                    ComponentInfo{3, 1, 1, 2}}};
}

std::vector<std::uint8_t> encode_jpeg(std::span<const CoeffPlane> planes,
                                      std::span<const QuantMatrix> qmatrices,
                                      const FrameInfo& frame) {
  const int nc = frame.component_count();
  require(nc == 1 || nc == 3, ErrorCode::kDimensionError,
          "frame must have 1 or 3 components");
  require(planes.size() == static_cast<std::size_t>(nc) &&
              qmatrices.size() == static_cast<std::size_t>(nc),
          ErrorCode::kDimensionError, "one plane and one Q-matrix per component");
  require(frame.width >= 1 && frame.width <= 65535 && frame.height >= 1 &&
              frame.height <= 65535,
          ErrorCode::kDimensionError, "frame dimensions out of range");
  for (int c = 0; c < nc; ++c) {
    const ComponentInfo& ci = frame.components[c];
    require(ci.h_sampling == 1 && ci.v_sampling == 1, ErrorCode::kDimensionError,
            "only 4:4:4 or grayscale frames can be encoded");
    require(planes[c].width_blocks == frame.width_blocks() &&
                planes[c].height_blocks == frame.height_blocks() &&
                planes[c].block_count() ==
                    static_cast<std::size_t>(planes[c].width_blocks) *
                        planes[c].height_blocks,
            ErrorCode::kDimensionError, "plane dimensions disagree with frame");
  }

  ByteWriter w;
  w.marker(0xD8);
  // JFIF APP0, version 1.01, no density units, 1:1 aspect, no thumbnail.
  w.marker(0xE0);
  w.u16(16);
  for (char ch : {'J', 'F', 'I', 'F', '\0'}) w.u8(ch);
  w.u8(1);
  w.u8(1);
  w.u8(0);
  w.u16(1);
  w.u16(1);
  w.u8(0);
  w.u8(0);

  for (int c = 0; c < nc; ++c) {
    w.marker(0xDB);
    w.u16(2 + 1 + kBlockArea);
    w.u8(c);  // 8-bit precision, slot c
    for (int i = 0; i < kBlockArea; ++i) w.u8(qmatrices[c][kZigzagToRaster[i]]);
  }

  w.marker(0xC0);
  w.u16(8 + 3 * nc);
  w.u8(8);
  w.u16(frame.height);
  w.u16(frame.width);
  w.u8(nc);
  for (int c = 0; c < nc; ++c) {
    w.u8(frame.components[c].id);
    w.u8(0x11);
    w.u8(c);
  }

  const HuffmanTable tables[] = {standard_dc_luma(), standard_ac_luma(),
                                 standard_dc_chroma(), standard_ac_chroma()};
  write_dht(w, tables[0]);
  write_dht(w, tables[1]);
  if (nc == 3) {
    write_dht(w, tables[2]);
    write_dht(w, tables[3]);
  }

  w.marker(0xDA);
  w.u16(6 + 2 * nc);
  w.u8(nc);
  for (int c = 0; c < nc; ++c) {
    w.u8(frame.components[c].id);
    w.u8(c == 0 ? 0x00 : 0x11);
  }
  w.u8(0);
  w.u8(63);
  w.u8(0);

  const HuffmanEncoder dc_luma(tables[0]), ac_luma(tables[1]);
  const HuffmanEncoder dc_chroma(tables[2]), ac_chroma(tables[3]);
  BitWriter bw(w.bytes());
  std::vector<int> predictor(nc, 0);
  const int wb = frame.width_blocks();
  const int hb = frame.height_blocks();
  for (int by = 0; by < hb; ++by) {
    for (int bx = 0; bx < wb; ++bx) {
      for (int c = 0; c < nc; ++c) {
        encode_block(bw, planes[c].block(bx, by), predictor[c],
                     c == 0 ? dc_luma : dc_chroma, c == 0 ? ac_luma : ac_chroma);
      }
    }
  }
  bw.flush();
  w.marker(0xD9);
  return std::move(w.bytes());
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIoError,
          "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kIoError,
          "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorCode::kIoError,
          "write failed for " + path.string());
}

}  // namespace djpeg::jpeg
