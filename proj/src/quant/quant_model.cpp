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

#include "djpeg/quant/quant_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "djpeg/error.hpp"
#include "djpeg/util/rng.hpp"

namespace djpeg::quant {
namespace {

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
constexpr double kXgk[8] = {0.991455371120812639206854697526329,
                            0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926,
                            0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013,
                            0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245,
                            0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970,
                            0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518,
                            0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550,
                            0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649,
                            0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082,
                           0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975,
                           0.417959183673469387755102040816327};

constexpr int kMaxDepth = 40;

struct Estimate {
  double value;
  double error;
};

Estimate gk15(const DensitySpec& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f.pdf(c);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double sum = f.pdf(c - dx) + f.pdf(c + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  return {kronrod * h, std::abs((kronrod - gauss) * h)};
}

double adaptive(const DensitySpec& f, double a, double b, double tol, int depth) {
  const Estimate e = gk15(f, a, b);
  if (e.error <= tol || depth >= kMaxDepth) return e.value;
  const double m = 0.5 * (a + b);
  return adaptive(f, a, m, 0.5 * tol, depth + 1) +
         adaptive(f, m, b, 0.5 * tol, depth + 1);
}

void check_step(int q, const char* name) {
  require(q >= 1 && q <= 255, ErrorCode::kDomainError,
          std::string(name) + " must lie in [1, 255], got " + std::to_string(q));
}

void check_support(IntRange support) {
  require(support.lo <= support.hi, ErrorCode::kDomainError,
          "support must be a non-empty integer range");
}

// ceil(num / den) for den > 0.
long long ceil_div(long long num, long long den) {
  return num >= 0 ? (num + den - 1) / den : -((-num) / den);
}

// floor(x + 0.5), the rounding both quantizers use.
long long round_half_up(double x) { return static_cast<long long>(std::floor(x + 0.5)); }

}  // namespace

std::string_view family_name(DensityFamily family) {
  switch (family) {
    case DensityFamily::kUniform:
      return "uniform";
    case DensityFamily::kGaussian:
      return "gaussian";
    case DensityFamily::kLaplacian:
      return "laplacian";
  }
  return "unknown";
}

DensitySpec DensitySpec::uniform(double lo, double hi) {
  DensitySpec d{DensityFamily::kUniform, lo, hi};
  d.validate();
  return d;
}

DensitySpec DensitySpec::gaussian(double mean, double sigma) {
  DensitySpec d{DensityFamily::kGaussian, mean, sigma};
  d.validate();
  return d;
}

DensitySpec DensitySpec::laplacian(double location, double diversity) {
  DensitySpec d{DensityFamily::kLaplacian, location, diversity};
  d.validate();
  return d;
}

void DensitySpec::validate() const {
  require(std::isfinite(p0) && std::isfinite(p1), ErrorCode::kDomainError,
          "density parameters must be finite");
  if (family == DensityFamily::kUniform) {
    require(p1 > p0, ErrorCode::kDomainError, "uniform density needs lo < hi");
  } else {
    require(p1 > 0.0, ErrorCode::kDomainError, "density scale must be positive");
  }
}

double DensitySpec::pdf(double u) const {
  switch (family) {
    case DensityFamily::kUniform:
      return (u >= p0 && u <= p1) ? 1.0 / (p1 - p0) : 0.0;
    case DensityFamily::kGaussian: {
      const double z = (u - p0) / p1;
      return std::exp(-0.5 * z * z) / (p1 * std::sqrt(2.0 * std::numbers::pi));
    }
    case DensityFamily::kLaplacian:
      return std::exp(-std::abs(u - p0) / p1) / (2.0 * p1);
  }
  return 0.0;
}

double DensitySpec::cdf(double u) const {
  switch (family) {
    case DensityFamily::kUniform:
      return std::clamp((u - p0) / (p1 - p0), 0.0, 1.0);
    case DensityFamily::kGaussian:
      return 0.5 * std::erfc(-(u - p0) / (p1 * std::numbers::sqrt2));
    case DensityFamily::kLaplacian:
      return u < p0 ? 0.5 * std::exp((u - p0) / p1)
                    : 1.0 - 0.5 * std::exp(-(u - p0) / p1);
  }
  return 0.0;
}

std::vector<double> DensitySpec::breakpoints() const {
  switch (family) {
    case DensityFamily::kUniform:
      return {p0, p1};
    case DensityFamily::kGaussian:
    case DensityFamily::kLaplacian: {
      // The location (a cusp for the Laplacian) plus scale-spaced cuts, so no
      // subinterval is wide enough for quadrature nodes to step over the mass.
      std::vector<double> cuts = {p0};
      const bool gaussian = family == DensityFamily::kGaussian;
      for (double k : gaussian ? std::vector<double>{0.5, 1, 2, 3, 4, 6, 8, 12}
                               : std::vector<double>{0.5, 1, 2, 4, 8, 16, 32, 64}) {
        cuts.push_back(p0 - k * p1);
        cuts.push_back(p0 + k * p1);
      }
      std::sort(cuts.begin(), cuts.end());
      return cuts;
    }
  }
  return {};
}

double DensitySpec::sample(std::mt19937_64& rng) const {
  switch (family) {
    case DensityFamily::kUniform:
      return util::uniform(rng, p0, p1);
    case DensityFamily::kGaussian:
      return p0 + p1 * util::normal(rng);
    case DensityFamily::kLaplacian: {
      const double e = -std::log(1.0 - util::uniform01(rng));
      return util::uniform01(rng) < 0.5 ? p0 - p1 * e : p0 + p1 * e;
    }
  }
  return 0.0;
}

std::string DensitySpec::to_string() const {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s(%g,%g)", family_name(family).data(), p0, p1);
  return buf;
}

double Pmf::at(int d) const {
  if (d < d_min || d > d_max()) return 0.0;
  return p[static_cast<std::size_t>(d - d_min)];
}

double Pmf::total() const {
  double s = 0.0;
  for (double v : p) s += v;
  return s;
}

std::string_view scenario_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kS1:
      return "S1";
    case ScenarioKind::kS2:
      return "S2";
    case ScenarioKind::kS3:
      return "S3";
    case ScenarioKind::kS4:
      return "S4";
    case ScenarioKind::kS5:
      return "S5";
  }
  return "unknown";
}

double integrate_density(const DensitySpec& density, double a, double b,
                         double abs_tol) {
  if (!(b > a)) return 0.0;
  std::vector<double> cuts = {a};
  for (double x : density.breakpoints()) {
    if (x > a && x < b) cuts.push_back(x);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  const double tol = abs_tol / static_cast<double>(cuts.size() - 1);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += adaptive(density, cuts[i], cuts[i + 1], tol, 0);
  }
  return total;
}

Pmf pmf_single(int q1, const DensitySpec& density, IntRange support) {
  check_step(q1, "q1");
  check_support(support);
  density.validate();
  Pmf out{support.lo, std::vector<double>(static_cast<std::size_t>(support.size()))};
  for (int s = support.lo; s <= support.hi; ++s) {
    const double lo = 0.5 * q1 * (2.0 * s - 1.0);
    const double hi = 0.5 * q1 * (2.0 * s + 1.0);
    out.p[static_cast<std::size_t>(s - support.lo)] = integrate_density(density, lo, hi);
  }
  return out;
}

Pmf pmf_double(int q1, int q2, const DensitySpec& density, IntRange support) {
  check_step(q1, "q1");
  check_step(q2, "q2");
  check_support(support);
  density.validate();
  Pmf out{support.lo, std::vector<double>(static_cast<std::size_t>(support.size()))};
  // Bound for d +/- 0.5 is q1 * (ceil(q2 * (2d -/+ 1) / (2 q1)) - 0.5); the
  // ceiling is taken in exact integer arithmetic.
  const auto bound = [&](long long twice_d_half) {
    const long long c = ceil_div(static_cast<long long>(q2) * twice_d_half, 2LL * q1);
    return 0.5 * q1 * (2.0 * static_cast<double>(c) - 1.0);
  };
  for (int d = support.lo; d <= support.hi; ++d) {
    const double lo = bound(2LL * d - 1);
    const double hi = bound(2LL * d + 1);
    out.p[static_cast<std::size_t>(d - support.lo)] = integrate_density(density, lo, hi);
  }
  return out;
}

ScenarioKind classify_scenario(int q1, int q2) {
  check_step(q1, "q1");
  check_step(q2, "q2");
  if (q1 == q2) return ScenarioKind::kS5;
  if (q1 > q2) return q1 % q2 == 0 ? ScenarioKind::kS1 : ScenarioKind::kS2;
  return q2 % q1 == 0 ? ScenarioKind::kS3 : ScenarioKind::kS4;
}

Pmf empirical_pmf(int q1, std::optional<int> q2, std::int64_t samples,
                  const DensitySpec& density, std::uint64_t seed, IntRange support) {
  check_step(q1, "q1");
  if (q2) check_step(*q2, "q2");
  check_support(support);
  density.validate();
  require(samples >= 1, ErrorCode::kDomainError, "samples must be at least 1");
  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(support.size()), 0);
  for (std::int64_t i = 0; i < samples; ++i) {
    long long v = round_half_up(density.sample(rng) / q1);
    if (q2) v = round_half_up(static_cast<double>(v * q1) / *q2);
    if (v >= support.lo && v <= support.hi) ++counts[static_cast<std::size_t>(v - support.lo)];
  }
  Pmf out{support.lo, std::vector<double>(counts.size())};
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out.p[i] = static_cast<double>(counts[i]) / static_cast<double>(samples);
  }
  return out;
}

std::vector<int> missing_bins(const Pmf& pmf, double eps) {
  require(eps >= 0.0, ErrorCode::kDomainError, "eps must be non-negative");
  std::vector<int> out;
  for (int d = pmf.d_min; d <= pmf.d_max(); ++d) {
    if (pmf.at(d) > eps) continue;
    const bool left = d > pmf.d_min && pmf.at(d - 1) > eps;
    const bool right = d < pmf.d_max() && pmf.at(d + 1) > eps;
    if (left || right) out.push_back(d);
  }
  return out;
}

double total_variation(const Pmf& a, const Pmf& b) {
  if (a.p.empty() && b.p.empty()) return 0.0;
  const int lo = std::min(a.p.empty() ? b.d_min : a.d_min, b.p.empty() ? a.d_min : b.d_min);
  const int hi = std::max(a.p.empty() ? b.d_max() : a.d_max(),
                          b.p.empty() ? a.d_max() : b.d_max());
  double s = 0.0;
  for (int d = lo; d <= hi; ++d) s += std::abs(a.at(d) - b.at(d));
  return 0.5 * s;
}

std::string pmf_to_csv(const Pmf& pmf) {
  std::string out = "d,P(d)\n";
  char buf[64];
  for (int d = pmf.d_min; d <= pmf.d_max(); ++d) {
    std::snprintf(buf, sizeof buf, "%d,%.17g\n", d, pmf.at(d));
    out += buf;
  }
  return out;
}

}  // namespace djpeg::quant
