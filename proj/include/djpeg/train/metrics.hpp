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

// Binary classification metrics. Double-compressed patches are the positive
// class and a score at or above the threshold counts as positive.

#ifndef DJPEG_TRAIN_METRICS_HPP_
#define DJPEG_TRAIN_METRICS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace djpeg::train {

struct Confusion {
  std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }
  std::uint64_t positives() const { return tp + fn; }
  std::uint64_t negatives() const { return tn + fp; }
  // Each ratio is 0 when its denominator is 0.
  double tpr() const;
  double tnr() const;
  double accuracy() const;

  bool operator==(const Confusion&) const = default;
};

// ShapeError when the spans differ in length.
Confusion confusion(std::span<const double> scores, std::span<const std::uint8_t> labels,
                    double threshold = 0.5);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // +inf for the (0, 0) corner
};

struct Roc {
  std::vector<RocPoint> points;  // nondecreasing in both fpr and tpr
  double auc = 0.0;
};

// Sweep over the unique scores with trapezoidal area. DegenerateLabels when
// either class is missing.
Roc roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);
// Mann-Whitney form of the AUC (ties count one half).
double rank_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct EvalReport {
  std::string name;
  double threshold = 0.5;
  Confusion counts;
  std::optional<Roc> roc;  // absent when only one class is present
  double loss = 0.0;       // mean binary cross-entropy

  double tpr() const { return counts.tpr(); }
  double tnr() const { return counts.tnr(); }
  double accuracy() const { return counts.accuracy(); }
};

EvalReport make_report(std::string name, std::span<const double> scores,
                       std::span<const std::uint8_t> labels, double threshold = 0.5);

// One JSON object, no trailing newline.
std::string report_json(const EvalReport& r);
// Header "fpr,tpr,threshold" then one line per point.
std::string roc_csv(const Roc& roc);

}  // namespace djpeg::train

#endif  // DJPEG_TRAIN_METRICS_HPP_
