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

#ifndef OPENINC_METRICS_HPP_
#define OPENINC_METRICS_HPP_

#include <span>
#include <vector>

namespace openinc {

/// Last-step accuracy A^T.
double lca(std::span<const double> step_accuracies);

/// Mean of A^1..A^T.
double aia(std::span<const double> step_accuracies);

/// Average forgetting. per_step[k][t] is the accuracy on task t's test data
/// after step k (t <= k, 0-based); the result is the mean over t < T-1 of
/// per_step[t][t] - per_step[T-1][t]. Needs T >= 2.
double af(const std::vector<std::vector<double>>& per_step);

/// ROC area by the Mann-Whitney statistic: P(ind > ood) + 0.5 P(ind == ood).
double auc(std::span<const double> ind_scores, std::span<const double> ood_scores);

/// Precision-recall area with IND as positive class: sum over descending
/// distinct thresholds of (recall step) x precision. The curve starts at the
/// precision of the highest-scored group; there is no anchor at precision 1.
double aupr(std::span<const double> ind_scores, std::span<const double> ood_scores);

struct CurvePoint {
  double rejection_rate = 0.0;
  double accuracy = 0.0;
  int retained = 0;
};

/// Accuracy over retained samples as the rejection rate sweeps
/// 0, step, 2 step, ... below 100 percent. Samples are retained when their
/// score is >= the nearest-rank rejection-rate percentile of all scores.
/// Points with nothing retained are omitted.
std::vector<CurvePoint> rejection_curve(std::span<const double> scores,
                                        const std::vector<bool>& correct,
                                        int grid_step_percent = 5);

}  // namespace openinc

#endif  // OPENINC_METRICS_HPP_
