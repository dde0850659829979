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

#include "djpeg/simd/kernels.hpp"

namespace djpeg::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_scalar(const double* a, std::size_t rows, std::size_t cols,
                 const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] += dot_scalar(a + r * cols, x, cols);
  }
}

void gemv_t_scalar(const double* a, std::size_t rows, std::size_t cols,
                   const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    axpy_scalar(xr, a + r * cols, y, cols);
  }
}

void ger_scalar(double* a, std::size_t rows, std::size_t cols, const double* u,
                const double* v) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double ur = u[r];
    if (ur == 0.0) continue;
    axpy_scalar(ur, v, a + r * cols, cols);
  }
}

constexpr KernelTable kScalarTable{
    Isa::kScalar, dot_scalar, axpy_scalar, gemv_scalar, gemv_t_scalar,
    ger_scalar,
};

}  // namespace

namespace detail {
const KernelTable& scalar_table() { return kScalarTable; }
}  // namespace detail

}  // namespace djpeg::simd
