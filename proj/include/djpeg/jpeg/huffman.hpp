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

#ifndef DJPEG_JPEG_HUFFMAN_HPP_
#define DJPEG_JPEG_HUFFMAN_HPP_

#include <array>
#include <cstdint>
#include <vector>

namespace djpeg::jpeg {

enum class HuffmanClass : std::uint8_t { kDc = 0, kAc = 1 };

// A DHT table as stored in the stream: number of codes of each length 1..16
// followed by the symbols in code order.
struct HuffmanTable {
  HuffmanClass cls = HuffmanClass::kDc;
  int id = 0;
  std::array<std::uint8_t, 16> counts{};
  std::vector<std::uint8_t> symbols;

  // Throws CorruptBitstream when the lengths do not describe a prefix-free
  // canonical code or the symbol list does not match them.
  void validate() const;

  bool operator==(const HuffmanTable&) const = default;
};

// Annex K example tables.
HuffmanTable standard_dc_luma();
HuffmanTable standard_ac_luma();
HuffmanTable standard_dc_chroma();
HuffmanTable standard_ac_chroma();

// Canonical decoding tables (Annex F.2.2.3 style).
class HuffmanDecoder {
 public:
  HuffmanDecoder() = default;
  explicit HuffmanDecoder(const HuffmanTable& table);

  bool empty() const { return symbols_.empty(); }

  // Decodes one symbol by pulling bits from `next_bit` (returns 0/1). Throws
  // CorruptBitstream for a code longer than 16 bits.
  template <typename BitSource>
  std::uint8_t decode(BitSource&& next_bit) const;

 private:
  std::array<std::int32_t, 18> maxcode_{};
  std::array<std::int32_t, 17> valptr_{};
  std::array<std::int32_t, 17> mincode_{};
  std::vector<std::uint8_t> symbols_;
};

// Code word and length for each symbol value.
struct HuffmanEncoder {
  std::array<std::uint16_t, 256> code{};
  std::array<std::uint8_t, 256> length{};  // 0 = symbol absent

  explicit HuffmanEncoder(const HuffmanTable& table);
};

[[noreturn]] void throw_bad_huffman_code();

template <typename BitSource>
std::uint8_t HuffmanDecoder::decode(BitSource&& next_bit) const {
  std::int32_t code = next_bit();
  for (int len = 1; len <= 16; ++len) {
    if (code <= maxcode_[len]) {
      return symbols_[valptr_[len] + code - mincode_[len]];
    }
    code = (code << 1) | next_bit();
  }
  throw_bad_huffman_code();
}

}  // namespace djpeg::jpeg

#endif  // DJPEG_JPEG_HUFFMAN_HPP_
