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

#include <array>
#include <optional>
#include <string>

#include "djpeg/error.hpp"
#include "djpeg/jpeg/codec.hpp"
#include "djpeg/jpeg/huffman.hpp"

namespace djpeg::jpeg {
namespace {

constexpr std::uint8_t kSoi = 0xD8;
constexpr std::uint8_t kEoi = 0xD9;
constexpr std::uint8_t kSos = 0xDA;
constexpr std::uint8_t kDqt = 0xDB;
constexpr std::uint8_t kDnl = 0xDC;
constexpr std::uint8_t kDri = 0xDD;
constexpr std::uint8_t kDht = 0xC4;
constexpr std::uint8_t kDac = 0xCC;
constexpr std::uint8_t kSof0 = 0xC0;

bool is_rst(std::uint8_t m) { return m >= 0xD0 && m <= 0xD7; }

// SOF1..SOF15 except DHT (C4), JPG (C8) and DAC (CC).
bool is_other_sof(std::uint8_t m) {
  return m >= 0xC1 && m <= 0xCF && m != kDht && m != 0xC8 && m != kDac;
}

std::string hex(std::uint8_t m) {
  static constexpr char kDigits[] = "0123456789ABCDEF";
  return std::string("0xFF") + kDigits[m >> 4] + kDigits[m & 15];
}

[[noreturn]] void truncated(const char* where) {
  fail(ErrorCode::kCorruptBitstream, std::string("truncated ") + where);
}

// Cursor over one marker segment's payload.
class SegmentReader {
 public:
  SegmentReader(std::span<const std::uint8_t> data, const char* name)
      : data_(data), name_(name) {}

  std::uint8_t u8() {
    if (pos_ >= data_.size()) truncated(name_);
    return data_[pos_++];
  }
  std::uint16_t u16() {
    const std::uint16_t hi = u8();
    return static_cast<std::uint16_t>((hi << 8) | u8());
  }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::span<const std::uint8_t> data_;
  const char* name_;
  std::size_t pos_ = 0;
};

// Entropy-coded segment reader: removes stuffed zero bytes and stops at
// markers.
class BitReader {
 public:
  BitReader(std::span<const std::uint8_t> bytes, std::size_t pos)
      : bytes_(bytes), pos_(pos) {}

  int bit() {
    if (bits_left_ == 0) load_byte();
    --bits_left_;
    return (current_ >> bits_left_) & 1;
  }

  int bits(int n) {
    int v = 0;
    for (int i = 0; i < n; ++i) v = (v << 1) | bit();
    return v;
  }

  // Drops buffered bits and consumes the expected RSTn marker.
  void restart(int expected) {
    bits_left_ = 0;
    const auto want = static_cast<std::uint8_t>(0xD0 + expected);
    if (pos_ + 1 >= bytes_.size()) truncated("scan before restart marker");
    if (bytes_[pos_] != 0xFF || bytes_[pos_ + 1] != want) {
      fail(ErrorCode::kCorruptBitstream, "expected restart marker " + hex(want));
    }
    pos_ += 2;
  }

  std::size_t position() const { return pos_; }

 private:
  void load_byte() {
    if (pos_ >= bytes_.size()) truncated("entropy-coded data");
    const std::uint8_t b = bytes_[pos_];
    if (b == 0xFF) {
      if (pos_ + 1 >= bytes_.size()) truncated("entropy-coded data");
      if (bytes_[pos_ + 1] != 0x00) {
        fail(ErrorCode::kCorruptBitstream,
             "marker " + hex(bytes_[pos_ + 1]) + " inside entropy-coded data");
      }
      pos_ += 2;
    } else {
      ++pos_;
    }
    current_ = b;
    bits_left_ = 8;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
  std::uint8_t current_ = 0;
  int bits_left_ = 0;
};

int extend(int v, int s) {
  return v < (1 << (s - 1)) ? v - (1 << s) + 1 : v;
}

struct ScanComponent {
  int frame_index;
  int dc_table;
  int ac_table;
};

class Parser {
 public:
  explicit Parser(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  JpegCoefficients run() {
    if (bytes_.size() < 2 || bytes_[0] != 0xFF || bytes_[1] != kSoi) {
      fail(ErrorCode::kCorruptBitstream, "missing SOI marker");
    }
    pos_ = 2;
    for (;;) {
      const std::uint8_t marker = next_marker();
      if (marker == kEoi) break;
      if (marker == kSoi) fail(ErrorCode::kCorruptBitstream, "nested SOI");
      if (is_rst(marker)) continue;  // stray restart marker between segments
      if (marker == kSof0) {
        read_sof(segment("SOF0"));
      } else if (is_other_sof(marker)) {
        fail(ErrorCode::kUnsupportedMarker,
             "frame type " + hex(marker) + " (only baseline SOF0 is supported)");
      } else if (marker == kDac) {
        fail(ErrorCode::kUnsupportedMarker, "arithmetic coding (DAC)");
      } else if (marker == kDnl) {
        fail(ErrorCode::kUnsupportedMarker, "DNL marker");
      } else if (marker == kDqt) {
        read_dqt(segment("DQT"));
      } else if (marker == kDht) {
        read_dht(segment("DHT"));
      } else if (marker == kDri) {
        SegmentReader r = segment("DRI");
        restart_interval_ = r.u16();
      } else if (marker == kSos) {
        read_sos(segment("SOS"));
      } else {
        segment("marker segment");  // APPn, COM and anything else: skip
      }
    }
    require(out_.frame.component_count() > 0, ErrorCode::kCorruptBitstream,
            "no SOF0 frame header");
    for (int c = 0; c < out_.frame.component_count(); ++c) {
      require(scanned_[c], ErrorCode::kCorruptBitstream,
              "component " + std::to_string(out_.frame.components[c].id) +
                  " never appears in a scan");
    }
    out_.restart_interval = restart_interval_;
    return std::move(out_);
  }

 private:
  std::uint8_t next_marker() {
    if (pos_ >= bytes_.size()) truncated("stream (no EOI)");
    require(bytes_[pos_] == 0xFF, ErrorCode::kCorruptBitstream,
            "expected marker at offset " + std::to_string(pos_));
    while (pos_ < bytes_.size() && bytes_[pos_] == 0xFF) ++pos_;  // fill bytes
    if (pos_ >= bytes_.size()) truncated("marker");
    return bytes_[pos_++];
  }

  SegmentReader segment(const char* name) {
    if (pos_ + 2 > bytes_.size()) truncated(name);
    const std::size_t len = (bytes_[pos_] << 8) | bytes_[pos_ + 1];
    require(len >= 2, ErrorCode::kCorruptBitstream,
            std::string("bad segment length in ") + name);
    if (pos_ + len > bytes_.size()) truncated(name);
    SegmentReader r(bytes_.subspan(pos_ + 2, len - 2), name);
    pos_ += len;
    return r;
  }

  void read_sof(SegmentReader r) {
    require(out_.frame.component_count() == 0, ErrorCode::kCorruptBitstream,
            "duplicate frame header");
    const int precision = r.u8();
    require(precision == 8, ErrorCode::kUnsupportedMarker,
            std::to_string(precision) + "-bit sample precision");
    FrameInfo& f = out_.frame;
    f.height = r.u16();
    f.width = r.u16();
    require(f.height > 0, ErrorCode::kUnsupportedMarker,
            "height defined by DNL");
    require(f.width > 0, ErrorCode::kCorruptBitstream, "zero frame width");
    const int nf = r.u8();
    require(nf == 1 || nf == 3, ErrorCode::kUnsupportedMarker,
            std::to_string(nf) + " components (expected 1 or 3)");
    for (int i = 0; i < nf; ++i) {
      ComponentInfo c;
      c.id = r.u8();
      const int hv = r.u8();
      c.h_sampling = hv >> 4;
      c.v_sampling = hv & 15;
      c.quant_table_id = r.u8();
      require(c.quant_table_id <= 3, ErrorCode::kCorruptBitstream,
              "quantization table selector out of range");
      for (const ComponentInfo& other : f.components) {
        require(other.id != c.id, ErrorCode::kCorruptBitstream,
                "duplicate component id");
      }
      if (nf == 3) {
        require(c.h_sampling == 1 && c.v_sampling == 1,
                ErrorCode::kUnsupportedMarker,
                "chroma subsampling (only 4:4:4 is supported)");
      } else {
        c.h_sampling = 1;
        c.v_sampling = 1;
      }
      f.components.push_back(c);
    }
    for (int i = 0; i < nf; ++i) {
      out_.planes.emplace_back(f.width_blocks(), f.height_blocks(),
                               f.components[i].id);
    }
    out_.qmatrices.assign(nf, QuantMatrix{});
    scanned_.assign(nf, false);
  }

  void read_dqt(SegmentReader r) {
    while (r.remaining() > 0) {
      const int pq_tq = r.u8();
      const int precision = pq_tq >> 4;
      const int slot = pq_tq & 15;
      require(precision == 0, ErrorCode::kUnsupportedMarker,
              "16-bit quantization table");
      require(slot <= 3, ErrorCode::kCorruptBitstream,
              "quantization table slot out of range");
      std::array<int, kBlockArea> raster{};
      for (int i = 0; i < kBlockArea; ++i) {
        const int v = r.u8();
        require(v >= 1, ErrorCode::kCorruptBitstream, "zero q-factor in DQT");
        raster[kZigzagToRaster[i]] = v;
      }
      qtables_[slot] = QuantMatrix(raster);
    }
  }

  void read_dht(SegmentReader r) {
    while (r.remaining() > 0) {
      const int tc_th = r.u8();
      const int tc = tc_th >> 4;
      require(tc <= 1, ErrorCode::kCorruptBitstream, "bad Huffman table class");
      HuffmanTable t;
      t.cls = tc == 0 ? HuffmanClass::kDc : HuffmanClass::kAc;
      t.id = tc_th & 15;
      int total = 0;
      for (auto& c : t.counts) {
        c = r.u8();
        total += c;
      }
      require(total <= 256, ErrorCode::kCorruptBitstream,
              "Huffman table declares more than 256 symbols");
      t.symbols.resize(total);
      for (auto& s : t.symbols) s = r.u8();
      t.validate();
      (tc == 0 ? dc_tables_ : ac_tables_)[t.id] = HuffmanDecoder(t);
    }
  }

  void read_sos(SegmentReader r) {
    const FrameInfo& f = out_.frame;
    require(f.component_count() > 0, ErrorCode::kCorruptBitstream,
            "scan before frame header");
    const int ns = r.u8();
    require(ns >= 1 && ns <= f.component_count(), ErrorCode::kCorruptBitstream,
            "bad scan component count");
    std::vector<ScanComponent> comps;
    for (int i = 0; i < ns; ++i) {
      const int id = r.u8();
      const int tables = r.u8();
      int index = -1;
      for (int c = 0; c < f.component_count(); ++c) {
        if (f.components[c].id == id) index = c;
      }
      require(index >= 0, ErrorCode::kCorruptBitstream,
              "scan references unknown component " + std::to_string(id));
      ScanComponent sc{index, tables >> 4, tables & 15};
      require(sc.dc_table <= 3 && !dc_tables_[sc.dc_table].empty(),
              ErrorCode::kMissingTable,
              "DC Huffman table " + std::to_string(sc.dc_table) + " undefined");
      require(sc.ac_table <= 3 && !ac_tables_[sc.ac_table].empty(),
              ErrorCode::kMissingTable,
              "AC Huffman table " + std::to_string(sc.ac_table) + " undefined");
      const int slot = f.components[index].quant_table_id;
      require(qtables_[slot].has_value(), ErrorCode::kMissingTable,
              "quantization table " + std::to_string(slot) + " undefined");
      out_.qmatrices[index] = *qtables_[slot];
      comps.push_back(sc);
    }
    const int ss = r.u8();
    const int se = r.u8();
    const int ah_al = r.u8();
    require(ss == 0 && se == 63 && ah_al == 0, ErrorCode::kUnsupportedMarker,
            "spectral selection / successive approximation (progressive scan)");
    decode_scan(comps);
  }

  void decode_scan(const std::vector<ScanComponent>& comps) {
    const FrameInfo& f = out_.frame;
    const int wb = f.width_blocks();
    const int hb = f.height_blocks();
    const long mcus = static_cast<long>(wb) * hb;
    BitReader reader(bytes_, pos_);
    std::vector<int> predictor(comps.size(), 0);
    int next_rst = 0;
    for (long m = 0; m < mcus; ++m) {
      if (restart_interval_ > 0 && m > 0 && m % restart_interval_ == 0) {
        reader.restart(next_rst);
        next_rst = (next_rst + 1) & 7;
        std::fill(predictor.begin(), predictor.end(), 0);
      }
      const int bx = static_cast<int>(m % wb);
      const int by = static_cast<int>(m / wb);
      for (std::size_t i = 0; i < comps.size(); ++i) {
        const ScanComponent& sc = comps[i];
        CoeffBlock& block = out_.planes[sc.frame_index].block(bx, by);
        decode_block(reader, dc_tables_[sc.dc_table], ac_tables_[sc.ac_table],
                     predictor[i], block);
      }
    }
    for (const ScanComponent& sc : comps) scanned_[sc.frame_index] = true;
    pos_ = reader.position();
    // Skip anything up to the next real marker (padding, trailing garbage).
    while (pos_ + 1 < bytes_.size() &&
           !(bytes_[pos_] == 0xFF && bytes_[pos_ + 1] != 0x00 &&
             !is_rst(bytes_[pos_ + 1]))) {
      ++pos_;
    }
  }

  static void decode_block(BitReader& reader, const HuffmanDecoder& dc,
                           const HuffmanDecoder& ac, int& predictor,
                           CoeffBlock& block) {
    auto next_bit = [&reader] { return reader.bit(); };
    block.fill(0);
    const int t = dc.decode(next_bit);
    require(t <= 15, ErrorCode::kCorruptBitstream, "DC category out of range");
    const int diff = t == 0 ? 0 : extend(reader.bits(t), t);
    predictor += diff;
    require(predictor >= -32768 && predictor <= 32767,
            ErrorCode::kCorruptBitstream, "DC value exceeds 16 bits");
    block[0] = predictor;
    for (int k = 1; k < kBlockArea;) {
      const int rs = ac.decode(next_bit);
      const int run = rs >> 4;
      const int size = rs & 15;
      if (size == 0) {
        if (run != 15) break;  // EOB
        k += 16;
        require(k <= kBlockArea, ErrorCode::kCorruptBitstream,
                "zero run past end of block");
        continue;
      }
      k += run;
      require(k < kBlockArea, ErrorCode::kCorruptBitstream,
              "AC run past end of block");
      block[kZigzagToRaster[k]] = extend(reader.bits(size), size);
      ++k;
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  JpegCoefficients out_;
  std::array<std::optional<QuantMatrix>, 4> qtables_;
  std::array<HuffmanDecoder, 4> dc_tables_;
  std::array<HuffmanDecoder, 4> ac_tables_;
  std::vector<bool> scanned_;
  int restart_interval_ = 0;
};

}  // namespace

JpegCoefficients parse_jpeg(std::span<const std::uint8_t> bytes) {
  return Parser(bytes).run();
}

}  // namespace djpeg::jpeg
