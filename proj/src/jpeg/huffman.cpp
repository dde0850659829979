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

#include "djpeg/jpeg/huffman.hpp"

#include <numeric>
#include <string>

#include "djpeg/error.hpp"

namespace djpeg::jpeg {
namespace {

HuffmanTable make_table(HuffmanClass cls, int id,
                        const std::array<std::uint8_t, 16>& counts,
                        std::vector<std::uint8_t> symbols) {
  HuffmanTable t;
  t.cls = cls;
  t.id = id;
  t.counts = counts;
  t.symbols = std::move(symbols);
  return t;
}

}  // namespace

void throw_bad_huffman_code() {
  fail(ErrorCode::kCorruptBitstream, "invalid Huffman code in entropy data");
}

void HuffmanTable::validate() const {
  const int total = std::accumulate(counts.begin(), counts.end(), 0);
  require(total <= 256, ErrorCode::kCorruptBitstream,
          "Huffman table declares more than 256 symbols");
  require(static_cast<std::size_t>(total) == symbols.size(),
          ErrorCode::kCorruptBitstream, "Huffman symbol count mismatch");
  require(id >= 0 && id <= 3, ErrorCode::kCorruptBitstream,
          "Huffman table id out of range: " + std::to_string(id));
  std::uint32_t code = 0;
  for (int len = 1; len <= 16; ++len) {
    code += counts[len - 1];
    require(code <= (1u << len), ErrorCode::kCorruptBitstream,
            "Huffman code lengths oversubscribe the code space");
    code <<= 1;
  }
  if (cls == HuffmanClass::kDc) {
    for (std::uint8_t s : symbols) {
      require(s <= 15, ErrorCode::kCorruptBitstream,
              "DC Huffman symbol exceeds category 15");
    }
  }
}

HuffmanDecoder::HuffmanDecoder(const HuffmanTable& table) : symbols_(table.symbols) {
  table.validate();
  std::int32_t code = 0;
  std::int32_t k = 0;
  for (int len = 1; len <= 16; ++len) {
    const int n = table.counts[len - 1];
    if (n == 0) {
      maxcode_[len] = -1;
    } else {
      valptr_[len] = k;
      mincode_[len] = code;
      code += n;
      k += n;
      maxcode_[len] = code - 1;
    }
    code <<= 1;
  }
  maxcode_[17] = 0x7fffffff;
}

HuffmanEncoder::HuffmanEncoder(const HuffmanTable& table) {
  table.validate();
  std::uint32_t code = 0;
  std::size_t k = 0;
  for (int len = 1; len <= 16; ++len) {
    for (int i = 0; i < table.counts[len - 1]; ++i, ++k) {
      const std::uint8_t sym = table.symbols[k];
      this->code[sym] = static_cast<std::uint16_t>(code++);
      length[sym] = static_cast<std::uint8_t>(len);
    }
    code <<= 1;
  }
}

HuffmanTable standard_dc_luma() {
  return make_table(HuffmanClass::kDc, 0,
                    {0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0},
                    {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
}

HuffmanTable standard_dc_chroma() {
  return make_table(HuffmanClass::kDc, 1,
                    {0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0},
                    {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
}

HuffmanTable standard_ac_luma() {
  return make_table(
      HuffmanClass::kAc, 0,
      {0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d},
      {0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06,
       0x13, 0x51, 0x61, 0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xa1, 0x08,
       0x23, 0x42, 0xb1, 0xc1, 0x15, 0x52, 0xd1, 0xf0, 0x24, 0x33, 0x62, 0x72,
       0x82, 0x09, 0x0a, 0x16, 0x17, 0x18, 0x19, 0x1a, 0x25, 0x26, 0x27, 0x28,
       0x29, 0x2a, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3a, 0x43, 0x44, 0x45,
       0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59,
       0x5a, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75,
       0x76, 0x77, 0x78, 0x79, 0x7a, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
       0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3,
       0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6,
       0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9,
       0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe1, 0xe2,
       0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf1, 0xf2, 0xf3, 0xf4,
       0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa});
}

HuffmanTable standard_ac_chroma() {
  return make_table(
      HuffmanClass::kAc, 1,
      {0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77},
      {0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41,
       0x51, 0x07, 0x61, 0x71, 0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91,
       0xa1, 0xb1, 0xc1, 0x09, 0x23, 0x33, 0x52, 0xf0, 0x15, 0x62, 0x72, 0xd1,
       0x0a, 0x16, 0x24, 0x34, 0xe1, 0x25, 0xf1, 0x17, 0x18, 0x19, 0x1a, 0x26,
       0x27, 0x28, 0x29, 0x2a, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3a, 0x43, 0x44,
       0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58,
       0x59, 0x5a, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74,
       0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x82, 0x83, 0x84, 0x85, 0x86, 0x87,
       0x88, 0x89, 0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a,
       0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4,
       0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7,
       0xc8, 0xc9, 0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda,
       0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf2, 0xf3, 0xf4,
       0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa});
}

}  // namespace djpeg::jpeg
