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

#ifndef OPENINC_SCORERS_HPP_
#define OPENINC_SCORERS_HPP_

#include <string_view>

#include <Eigen/Core>

#include "openinc/model.hpp"

namespace openinc {

/// In-distribution scoring function; larger means more in-distribution.
enum class Scorer { kSM, kSMMD, kEN, kENMD };

struct ScorerConfig {
  Scorer kind = Scorer::kENMD;
  double temperature = 1.0;
};

std::string_view to_string(Scorer kind);
/// Accepts sm|smmd|en|enmd (case-insensitive).
Scorer parse_scorer(std::string_view name);

/// Maximum softmax probability, taken over the first `ind_count` entries
/// (all entries when ind_count < 0). The softmax itself normalises over every
/// logit, so a trailing OOD logit still competes for probability mass.
double score_sm(const Eigen::VectorXd& logits, Eigen::Index ind_count = -1);

/// Negative energy: v * log(sum_i exp(f_i / v)).
double score_energy(const Eigen::VectorXd& logits, double temperature);

/// max_c -(z - mu_c)^T Sigma^{-1} (z - mu_c); always <= 0.
double mahalanobis_confidence(const Eigen::VectorXd& z, const TrainStats& stats);

/// 1 / (1 + d_min), d_min the smallest squared Mahalanobis distance.
double md_coefficient(const Eigen::VectorXd& z, const TrainStats& stats);

/// SM, EN, SM * c, or EN + log c. `ind_count` as in score_sm; EN variants
/// only sum over the in-distribution logits. `stats` is required for the MD
/// variants; `z` are the unrectified activations.
double score_combined(const ScorerConfig& config, const Eigen::VectorXd& logits,
                      const Eigen::VectorXd& z, const TrainStats* stats,
                      Eigen::Index ind_count = -1);

}  // namespace openinc

#endif  // OPENINC_SCORERS_HPP_
