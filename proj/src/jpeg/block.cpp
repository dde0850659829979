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

#include "djpeg/jpeg/block.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "djpeg/error.hpp"

namespace djpeg::jpeg {
namespace {

using Real64 = std::array<double, kBlockArea>;

// basis[u * 8 + x] = C(u)/2 * cos((2x + 1) u pi / 16), C(0) = 1/sqrt(2).
const Real64& dct_basis() {
  static const Real64 basis = [] {
    Real64 b{};
    for (int u = 0; u < kBlockDim; ++u) {
      const double cu = u == 0 ? std::numbers::sqrt2 / 2.0 : 1.0;
      for (int x = 0; x < kBlockDim; ++x) {
        b[u * kBlockDim + x] =
            0.5 * cu * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
      }
    }
    return b;
  }();
  return basis;
}

}  // namespace

CoeffPlane::CoeffPlane(int width_blocks, int height_blocks, int component_id)
    : component_id(component_id),
      width_blocks(width_blocks),
      height_blocks(height_blocks) {
  require(width_blocks >= 0 && height_blocks >= 0, ErrorCode::kDimensionError,
          "negative plane dimensions");
  blocks.assign(static_cast<std::size_t>(width_blocks) * height_blocks,
                CoeffBlock{});
}

CoeffPlane CoeffPlane::crop_blocks(int w, int h) const {
  require(w >= 1 && h >= 1 && w <= width_blocks && h <= height_blocks,
          ErrorCode::kDimensionError, "sub-grid exceeds plane");
  CoeffPlane out(w, h, component_id);
  for (int by = 0; by < h; ++by) {
    for (int bx = 0; bx < w; ++bx) out.block(bx, by) = block(bx, by);
  }
  return out;
}

Real64 dct_2d(const Real64& in) {
  const Real64& a = dct_basis();
  Real64 tmp{};
  // tmp = A * in (columns), then out = tmp * A^T (rows).
  for (int u = 0; u < kBlockDim; ++u) {
    for (int x = 0; x < kBlockDim; ++x) {
      double acc = 0.0;
      for (int y = 0; y < kBlockDim; ++y) {
        acc += a[u * kBlockDim + y] * in[y * kBlockDim + x];
      }
      tmp[u * kBlockDim + x] = acc;
    }
  }
  Real64 out{};
  for (int u = 0; u < kBlockDim; ++u) {
    for (int v = 0; v < kBlockDim; ++v) {
      double acc = 0.0;
      for (int x = 0; x < kBlockDim; ++x) {
        acc += tmp[u * kBlockDim + x] * a[v * kBlockDim + x];
      }
      out[u * kBlockDim + v] = acc;
    }
  }
  return out;
}

Real64 idct_2d(const Real64& in) {
  const Real64& a = dct_basis();
  Real64 tmp{};
  for (int y = 0; y < kBlockDim; ++y) {
    for (int v = 0; v < kBlockDim; ++v) {
      double acc = 0.0;
      for (int u = 0; u < kBlockDim; ++u) {
        acc += a[u * kBlockDim + y] * in[u * kBlockDim + v];
      }
      tmp[y * kBlockDim + v] = acc;
    }
  }
  Real64 out{};
  for (int y = 0; y < kBlockDim; ++y) {
    for (int x = 0; x < kBlockDim; ++x) {
      double acc = 0.0;
      for (int v = 0; v < kBlockDim; ++v) {
        acc += tmp[y * kBlockDim + v] * a[v * kBlockDim + x];
      }
      out[y * kBlockDim + x] = acc;
    }
  }
  return out;
}

CoeffBlock forward_block(const PixelBlock& pixels, const QuantMatrix& q) {
  Real64 shifted{};
  for (int i = 0; i < kBlockArea; ++i) shifted[i] = pixels[i] - 128.0;
  const Real64 freq = dct_2d(shifted);
  CoeffBlock out{};
  for (int i = 0; i < kBlockArea; ++i) {
    // std::round rounds halfway cases away from zero.
    out[i] = static_cast<std::int32_t>(std::round(freq[i] / q[i]));
  }
  return out;
}

PixelBlock inverse_block(const CoeffBlock& coeffs, const QuantMatrix& q) {
  Real64 dequant{};
  for (int i = 0; i < kBlockArea; ++i) {
    dequant[i] = static_cast<double>(coeffs[i]) * q[i];
  }
  const Real64 spatial = idct_2d(dequant);
  PixelBlock out{};
  for (int i = 0; i < kBlockArea; ++i) {
    const double v = std::round(spatial[i] + 128.0);
    out[i] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
  }
  return out;
}

}  // namespace djpeg::jpeg
