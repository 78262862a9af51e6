// Copyright 2026 The openinc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "openinc/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>

#include "openinc/detectors.hpp"
#include "openinc/error.hpp"

namespace openinc {

namespace {

struct Scored {
  double score;
  bool positive;
};

std::vector<Scored> merge(std::span<const double> ind, std::span<const double> ood) {
  if (ind.empty() || ood.empty()) {
    throw ArgumentError("IND and OOD score lists must both be non-empty");
  }
  std::vector<Scored> all;
  all.reserve(ind.size() + ood.size());
  for (double s : ind) all.push_back({s, true});
  for (double s : ood) all.push_back({s, false});
  return all;
}

}  // namespace

double lca(std::span<const double> step_accuracies) {
  if (step_accuracies.empty()) throw ArgumentError("no step accuracies");
  return step_accuracies.back();
}

double aia(std::span<const double> step_accuracies) {
  if (step_accuracies.empty()) throw ArgumentError("no step accuracies");
  return std::accumulate(step_accuracies.begin(), step_accuracies.end(), 0.0) /
         static_cast<double>(step_accuracies.size());
}

double af(const std::vector<std::vector<double>>& per_step) {
  const std::size_t steps = per_step.size();
  if (steps < 2) throw ArgumentError("forgetting needs at least two steps");
  const auto& last = per_step.back();
  if (last.size() < steps - 1) throw ArgumentError("last step lacks per-task accuracies");
  double sum = 0.0;
  for (std::size_t t = 0; t + 1 < steps; ++t) {
    if (per_step[t].size() <= t) {
      throw ArgumentError("step " + std::to_string(t) + " lacks its own task accuracy");
    }
    sum += per_step[t][t] - last[t];
  }
  return sum / static_cast<double>(steps - 1);
}

double auc(std::span<const double> ind_scores, std::span<const double> ood_scores) {
  auto all = merge(ind_scores, ood_scores);
  std::sort(all.begin(), all.end(),
            [](const Scored& a, const Scored& b) { return a.score < b.score; });
  // Sum of mid-ranks of the positives; ties share the average rank.
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    std::size_t pos = 0;
    while (j < all.size() && all[j].score == all[i].score) {
      if (all[j].positive) ++pos;
      ++j;
    }
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    rank_sum += mid_rank * static_cast<double>(pos);
    i = j;
  }
  const auto n1 = static_cast<double>(ind_scores.size());
  const auto n0 = static_cast<double>(ood_scores.size());
  return (rank_sum - n1 * (n1 + 1.0) / 2.0) / (n1 * n0);
}

double aupr(std::span<const double> ind_scores, std::span<const double> ood_scores) {
  auto all = merge(ind_scores, ood_scores);
  std::sort(all.begin(), all.end(),
            [](const Scored& a, const Scored& b) { return a.score > b.score; });
  const auto positives = static_cast<double>(ind_scores.size());
  double tp = 0.0;
  double fp = 0.0;
  double prev_recall = 0.0;
  double area = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j].score == all[i].score) {
      (all[j].positive ? tp : fp) += 1.0;
      ++j;
    }
    const double recall = tp / positives;
    area += (recall - prev_recall) * (tp / (tp + fp));
    prev_recall = recall;
    i = j;
  }
  return area;
}

std::vector<CurvePoint> rejection_curve(std::span<const double> scores,
                                        const std::vector<bool>& correct,
                                        int grid_step_percent) {
  if (scores.size() != correct.size()) {
    throw ArgumentError("scores and correctness flags are not aligned");
  }
  if (scores.empty()) throw ArgumentError("rejection curve of an empty set");
  if (grid_step_percent <= 0 || 100 % grid_step_percent != 0) {
    throw ArgumentError("grid step must divide 100");
  }
  std::vector<CurvePoint> curve;
  for (int rho = 0; rho < 100; rho += grid_step_percent) {
    const double threshold = percentile(scores, static_cast<double>(rho));
    int retained = 0;
    int hits = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= threshold) {
        ++retained;
        if (correct[i]) ++hits;
      }
    }
    if (retained == 0) continue;
    curve.push_back({rho / 100.0, static_cast<double>(hits) / retained, retained});
  }
  return curve;
}

}  // namespace openinc
