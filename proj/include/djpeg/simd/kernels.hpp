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

// Dense double-precision kernels used by the recurrent network. Every kernel
// has a portable scalar reference and optional AVX2+FMA / NEON variants; the
// active variant is chosen once per process from the CPU's capabilities and
// can be pinned with the DJPEG_SIMD environment variable (scalar|avx2|neon).

#ifndef DJPEG_SIMD_KERNELS_HPP_
#define DJPEG_SIMD_KERNELS_HPP_

#include <cstddef>
#include <span>
#include <string_view>

namespace djpeg::simd {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view isa_name(Isa isa);

// Raw kernel entry points. Matrices are row-major with `cols` contiguous
// entries per row.
struct KernelTable {
  Isa isa;
  // returns sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y[rows] += A[rows x cols] * x[cols]
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols,
               const double* x, double* y);
  // y[cols] += A^T * x[rows]
  void (*gemv_t)(const double* a, std::size_t rows, std::size_t cols,
                 const double* x, double* y);
  // A[rows x cols] += u[rows] * v[cols]^T
  void (*ger)(double* a, std::size_t rows, std::size_t cols, const double* u,
              const double* v);
};

bool isa_available(Isa isa);

// Table for a specific ISA; throws ConfigError when the ISA is not available
// on this CPU or was not compiled in.
const KernelTable& kernels_for(Isa isa);

// Process-wide active table.
const KernelTable& kernels();

// Overrides the process-wide selection (tests, benchmarking).
void set_active_isa(Isa isa);

// Typed convenience wrappers over the active table.
inline double dot(std::span<const double> a, std::span<const double> b) {
  return kernels().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  kernels().axpy(alpha, x.data(), y.data(), x.size());
}

inline void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
                 std::span<const double> x, std::span<double> y) {
  kernels().gemv(a.data(), rows, cols, x.data(), y.data());
}

inline void gemv_t(std::span<const double> a, std::size_t rows,
                   std::size_t cols, std::span<const double> x,
                   std::span<double> y) {
  kernels().gemv_t(a.data(), rows, cols, x.data(), y.data());
}

inline void ger(std::span<double> a, std::size_t rows, std::size_t cols,
                std::span<const double> u, std::span<const double> v) {
  kernels().ger(a.data(), rows, cols, u.data(), v.data());
}

namespace detail {
const KernelTable& scalar_table();
const KernelTable* avx2_table();  // nullptr when not compiled in
const KernelTable* neon_table();  // nullptr when not compiled in
}  // namespace detail

}  // namespace djpeg::simd

#endif  // DJPEG_SIMD_KERNELS_HPP_
