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

#include "djpeg/train/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "djpeg/error.hpp"
#include "djpeg/nn/ops.hpp"
#include "json.hpp"

namespace djpeg::train {
namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void require_aligned(std::size_t a, std::size_t b) {
  require(a == b, ErrorCode::kShapeError,
          std::to_string(a) + " scores but " + std::to_string(b) + " labels");
}

}  // namespace

double Confusion::tpr() const { return ratio(tp, positives()); }
double Confusion::tnr() const { return ratio(tn, negatives()); }
double Confusion::accuracy() const { return ratio(tp + tn, total()); }

Confusion confusion(std::span<const double> scores, std::span<const std::uint8_t> labels,
                    double threshold) {
  require_aligned(scores.size(), labels.size());
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool positive = scores[i] >= threshold;
    if (labels[i]) {
      positive ? ++c.tp : ++c.fn;
    } else {
      positive ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

Roc roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  require_aligned(scores.size(), labels.size());
  const auto pos = static_cast<std::uint64_t>(std::count_if(labels.begin(), labels.end(),
                                                            [](std::uint8_t l) { return l; }));
  const std::uint64_t neg = labels.size() - pos;
  require(pos > 0 && neg > 0, ErrorCode::kDegenerateLabels,
          "ROC needs both classes (" + std::to_string(pos) + " positive, " +
              std::to_string(neg) + " negative)");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  Roc roc;
  roc.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      labels[order[i]] ? ++tp : ++fp;
      ++i;
    }
    const RocPoint prev = roc.points.back();
    const RocPoint next{ratio(fp, neg), ratio(tp, pos), s};
    roc.auc += (next.fpr - prev.fpr) * (next.tpr + prev.tpr) / 2.0;
    roc.points.push_back(next);
  }
  return roc;
}

double rank_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  require_aligned(scores.size(), labels.size());
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0.0;
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) {
        pos_rank_sum += mid_rank;
        ++pos;
      }
    }
    i = j;
  }
  const std::uint64_t neg = labels.size() - pos;
  require(pos > 0 && neg > 0, ErrorCode::kDegenerateLabels, "rank AUC needs both classes");
  const double p = static_cast<double>(pos);
  return (pos_rank_sum - p * (p + 1) / 2.0) / (p * static_cast<double>(neg));
}

EvalReport make_report(std::string name, std::span<const double> scores,
                       std::span<const std::uint8_t> labels, double threshold) {
  EvalReport r;
  r.name = std::move(name);
  r.threshold = threshold;
  r.counts = confusion(scores, labels, threshold);
  if (r.counts.positives() > 0 && r.counts.negatives() > 0) r.roc = roc_auc(scores, labels);
  for (std::size_t i = 0; i < scores.size(); ++i) r.loss += nn::bce_loss(scores[i], labels[i]);
  if (!scores.empty()) r.loss /= static_cast<double>(scores.size());
  return r;
}

std::string report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["count"] = r.counts.total();
  j["threshold"] = r.threshold;
  j["tp"] = r.counts.tp;
  j["tn"] = r.counts.tn;
  j["fp"] = r.counts.fp;
  j["fn"] = r.counts.fn;
  j["tpr"] = r.tpr();
  j["tnr"] = r.tnr();
  j["accuracy"] = r.accuracy();
  j["loss"] = r.loss;
  j["auc"] = r.roc ? nlohmann::ordered_json(r.roc->auc) : nlohmann::ordered_json(nullptr);
  return j.dump();
}

std::string roc_csv(const Roc& roc) {
  std::string out = "fpr,tpr,threshold\n";
  char line[96];
  for (const auto& p : roc.points) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", p.fpr, p.tpr, p.threshold);
    out += line;
  }
  return out;
}

}  // namespace djpeg::train
