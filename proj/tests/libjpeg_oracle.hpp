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

// Test-only bridge to the system IJG/libjpeg-turbo library, used as an
// independent encoder/decoder when checking the in-house codec.

#ifndef DJPEG_TESTS_LIBJPEG_ORACLE_HPP_
#define DJPEG_TESTS_LIBJPEG_ORACLE_HPP_

#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <vector>

// clang-format off
#include <jpeglib.h>
// clang-format on

#include "djpeg/jpeg/codec.hpp"

namespace libjpeg_oracle {

struct ErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
};

inline void on_error(j_common_ptr cinfo) {
  auto* mgr = reinterpret_cast<ErrorManager*>(cinfo->err);
  std::longjmp(mgr->jump, 1);
}

struct WriteOptions {
  unsigned restart_interval = 0;  // in MCUs
  bool optimize_coding = false;   // per-image Huffman tables
};

// Writes quantized coefficients with libjpeg's transcoding path.
inline std::vector<std::uint8_t> write_coefficients(
    const std::vector<djpeg::jpeg::CoeffPlane>& planes,
    const std::vector<djpeg::jpeg::QuantMatrix>& qs, int width, int height,
    const WriteOptions& options) {
  jpeg_compress_struct cinfo{};
  ErrorManager err{};
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = on_error;
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(buffer);
    throw std::runtime_error("libjpeg failed while writing coefficients");
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &buffer, &size);
  const int nc = static_cast<int>(planes.size());
  cinfo.image_width = width;
  cinfo.image_height = height;
  cinfo.input_components = nc;
  cinfo.in_color_space = nc == 1 ? JCS_GRAYSCALE : JCS_YCbCr;
  jpeg_set_defaults(&cinfo);
#if JPEG_LIB_VERSION >= 70
  // The transcoding path skips the scaled-size setup.
  cinfo.jpeg_width = width;
  cinfo.jpeg_height = height;
  cinfo.min_DCT_h_scaled_size = DCTSIZE;
  cinfo.min_DCT_v_scaled_size = DCTSIZE;
#endif
  cinfo.optimize_coding = options.optimize_coding ? TRUE : FALSE;
  cinfo.restart_interval = options.restart_interval;
  std::vector<jvirt_barray_ptr> arrays(nc);
  for (int c = 0; c < nc; ++c) {
    jpeg_component_info& comp = cinfo.comp_info[c];
    comp.h_samp_factor = 1;
    comp.v_samp_factor = 1;
    comp.quant_tbl_no = c;
    if (!cinfo.quant_tbl_ptrs[c]) {
      cinfo.quant_tbl_ptrs[c] = jpeg_alloc_quant_table(
          reinterpret_cast<j_common_ptr>(&cinfo));
    }
    for (int i = 0; i < 64; ++i) {
      cinfo.quant_tbl_ptrs[c]->quantval[i] = static_cast<UINT16>(qs[c][i]);
    }
    cinfo.quant_tbl_ptrs[c]->sent_table = FALSE;
    comp.width_in_blocks = planes[c].width_blocks;
    comp.height_in_blocks = planes[c].height_blocks;
    arrays[c] = (*cinfo.mem->request_virt_barray)(
        reinterpret_cast<j_common_ptr>(&cinfo), JPOOL_IMAGE, TRUE,
        planes[c].width_blocks, planes[c].height_blocks, 1);
  }
  jpeg_write_coefficients(&cinfo, arrays.data());
  for (int c = 0; c < nc; ++c) {
    for (int by = 0; by < planes[c].height_blocks; ++by) {
      JBLOCKARRAY row = (*cinfo.mem->access_virt_barray)(
          reinterpret_cast<j_common_ptr>(&cinfo), arrays[c], by, 1, TRUE);
      for (int bx = 0; bx < planes[c].width_blocks; ++bx) {
        const auto& block = planes[c].block(bx, by);
        for (int i = 0; i < 64; ++i) row[0][bx][i] = static_cast<JCOEF>(block[i]);
      }
    }
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::vector<std::uint8_t> out(buffer, buffer + size);
  std::free(buffer);
  return out;
}

struct Decoded {
  int components = 0;
  std::vector<djpeg::jpeg::CoeffPlane> planes;
  std::vector<djpeg::jpeg::QuantMatrix> qs;
};

// Reads quantized coefficients with libjpeg (no IDCT).
inline Decoded read_coefficients(const std::vector<std::uint8_t>& bytes) {
  jpeg_decompress_struct cinfo{};
  ErrorManager err{};
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = on_error;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw std::runtime_error("libjpeg failed while reading coefficients");
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), bytes.size());
  jpeg_read_header(&cinfo, TRUE);
  jvirt_barray_ptr* arrays = jpeg_read_coefficients(&cinfo);
  Decoded out;
  out.components = cinfo.num_components;
  for (int c = 0; c < cinfo.num_components; ++c) {
    jpeg_component_info& comp = cinfo.comp_info[c];
    djpeg::jpeg::CoeffPlane plane(static_cast<int>(comp.width_in_blocks),
                                  static_cast<int>(comp.height_in_blocks),
                                  comp.component_id);
    for (int by = 0; by < plane.height_blocks; ++by) {
      JBLOCKARRAY row = (*cinfo.mem->access_virt_barray)(
          reinterpret_cast<j_common_ptr>(&cinfo), arrays[c], by, 1, FALSE);
      for (int bx = 0; bx < plane.width_blocks; ++bx) {
        for (int i = 0; i < 64; ++i) plane.block(bx, by)[i] = row[0][bx][i];
      }
    }
    out.planes.push_back(std::move(plane));
    std::vector<int> q(64);
    for (int i = 0; i < 64; ++i) q[i] = comp.quant_table->quantval[i];
    out.qs.emplace_back(q);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return out;
}

// Quantization table libjpeg builds for a quality setting (baseline clamp).
inline djpeg::jpeg::QuantMatrix quality_table(int quality) {
  jpeg_compress_struct cinfo{};
  jpeg_error_mgr jerr{};
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  cinfo.in_color_space = JCS_GRAYSCALE;
  cinfo.input_components = 1;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  std::vector<int> q(64);
  for (int i = 0; i < 64; ++i) q[i] = cinfo.quant_tbl_ptrs[0]->quantval[i];
  jpeg_destroy_compress(&cinfo);
  return djpeg::jpeg::QuantMatrix(q);
}

// Ordinary pixel-domain compression with libjpeg defaults (4:2:0 for
// colour input); `progressive` switches to SOF2.
inline std::vector<std::uint8_t> compress_pixels(const std::vector<std::uint8_t>& pixels,
                                                 int width, int height, int channels,
                                                 bool progressive) {
  jpeg_compress_struct cinfo{};
  jpeg_error_mgr jerr{};
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  jpeg_mem_dest(&cinfo, &buffer, &size);
  cinfo.image_width = width;
  cinfo.image_height = height;
  cinfo.input_components = channels;
  cinfo.in_color_space = channels == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_set_defaults(&cinfo);
  if (progressive) jpeg_simple_progression(&cinfo);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<JSAMPROW>(pixels.data() +
                                        cinfo.next_scanline * width * channels);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::vector<std::uint8_t> out(buffer, buffer + size);
  std::free(buffer);
  return out;
}

}  // namespace libjpeg_oracle

#endif  // DJPEG_TESTS_LIBJPEG_ORACLE_HPP_
