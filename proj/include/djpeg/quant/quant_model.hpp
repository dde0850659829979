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

// Probability model of single- and double-quantized DCT coefficients.
//
// An unquantized coefficient U with density f_U is quantized as
// S = floor(U/q1 + 0.5) and, for a second pass, D = floor(S*q1/q2 + 0.5).
// Both PMFs are integrals of f_U over unions of half-open intervals and are
// evaluated with adaptive Gauss-Kronrod quadrature.

#ifndef DJPEG_QUANT_QUANT_MODEL_HPP_
#define DJPEG_QUANT_QUANT_MODEL_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace djpeg::quant {

enum class DensityFamily { kUniform, kGaussian, kLaplacian };

std::string_view family_name(DensityFamily family);

struct DensitySpec {
  DensityFamily family = DensityFamily::kGaussian;
  // Uniform: [p0, p1]. Gaussian and Laplacian: location p0, scale p1
  // (standard deviation and diversity respectively).
  double p0 = 0.0;
  double p1 = 1.0;

  static DensitySpec uniform(double lo, double hi);
  static DensitySpec gaussian(double mean, double sigma);
  static DensitySpec laplacian(double location, double diversity);

  // DomainError unless the scale or width is strictly positive and finite.
  void validate() const;
  double pdf(double u) const;
  double cdf(double u) const;
  // Points where the density is not smooth, plus scale-spaced cuts that
  // keep integration subintervals commensurate with the density.
  std::vector<double> breakpoints() const;
  double sample(std::mt19937_64& rng) const;
  std::string to_string() const;
};

struct IntRange {
  int lo = -200;
  int hi = 200;
  int size() const { return hi - lo + 1; }
};

inline constexpr IntRange kDefaultSupport{-200, 200};

struct Pmf {
  int d_min = 0;
  std::vector<double> p;

  int d_max() const { return d_min + static_cast<int>(p.size()) - 1; }
  // Zero outside the support.
  double at(int d) const;
  double total() const;
};

enum class ScenarioKind { kS1, kS2, kS3, kS4, kS5 };

std::string_view scenario_name(ScenarioKind kind);

// Integral of the density over [a, b) to the given absolute tolerance.
double integrate_density(const DensitySpec& density, double a, double b,
                         double abs_tol = 1e-10);

Pmf pmf_single(int q1, const DensitySpec& density, IntRange support = kDefaultSupport);

Pmf pmf_double(int q1, int q2, const DensitySpec& density,
               IntRange support = kDefaultSupport);

ScenarioKind classify_scenario(int q1, int q2);

// Monte-Carlo estimate. Draws that land outside `support` count towards the
// denominator only, so the result carries the same deficit as the analytic
// model.
Pmf empirical_pmf(int q1, std::optional<int> q2, std::int64_t samples,
                  const DensitySpec& density, std::uint64_t seed,
                  IntRange support = kDefaultSupport);

// Bins with P(d) <= eps that have at least one neighbour above eps.
std::vector<int> missing_bins(const Pmf& pmf, double eps);

// Half the L1 distance over the union of both supports.
double total_variation(const Pmf& a, const Pmf& b);

// CSV with header "d,P(d)".
std::string pmf_to_csv(const Pmf& pmf);

}  // namespace djpeg::quant

#endif  // DJPEG_QUANT_QUANT_MODEL_HPP_
