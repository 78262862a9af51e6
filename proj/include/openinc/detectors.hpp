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

#ifndef OPENINC_DETECTORS_HPP_
#define OPENINC_DETECTORS_HPP_

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "openinc/model.hpp"

namespace openinc {

/// Post-hoc rectification applied to a head before scoring.
enum class Detector { kBase, kReAct, kDice, kScale };

struct DetectorConfig {
  Detector kind = Detector::kBase;
  double percentile = 0.0;

  /// Default percentile per kind: ReAct 90, DICE 85, SCALE 85.
  static DetectorConfig defaults(Detector kind);
};

std::string_view to_string(Detector kind);
/// Accepts base|react|dice|scale (case-insensitive).
Detector parse_detector(std::string_view name);

/// Nearest-rank percentile: the element at 1-based rank ceil(p/100 * n) of
/// the ascending sort; p = 0 gives the minimum.
double percentile(std::span<const double> values, double p);

/// Elementwise min(z_i, threshold).
Eigen::VectorXd rectify_react(const Eigen::VectorXd& z, double threshold);

/// Binary keep-mask over head weights, same shape as the weights.
struct DiceMask {
  Eigen::MatrixXd keep;  ///< entries are exactly 0.0 or 1.0

  Eigen::Index kept_in_row(Eigen::Index row) const;
};

/// Number of entries kept per row of width `width` at percentile p.
int dice_kept_count(int width, double p);

/// Contribution V = W * diag(mean_activations); per output row the
/// dice_kept_count largest entries of V survive (ties keep the lower column).
DiceMask build_dice_mask(const Eigen::MatrixXd& weight,
                         const Eigen::VectorXd& mean_activations, double p);

/// z * exp(r), r = sum(z) / sum(z_i >= percentile(z, p)).
/// Empty when z has no strictly positive entry.
std::optional<Eigen::VectorXd> rectify_scale(const Eigen::VectorXd& z, double p);

/// A head with its detector fixed, ready for repeated evaluation.
/// DICE masking is done once here instead of per sample.
class RectifiedHead {
 public:
  /// `stats` is required for ReAct and DICE (throws ArgumentError if null).
  RectifiedHead(const TaskHead& head, const DetectorConfig& config,
                const TrainStats* stats);

  Eigen::VectorXd logits(const Eigen::VectorXd& z) const;

 private:
  const TaskHead* head_;
  DetectorConfig config_;
  double react_threshold_ = 0.0;
  Eigen::MatrixXd weight_;  // masked weights for DICE
};

Eigen::VectorXd detector_logits(const TaskHead& head, const Eigen::VectorXd& z,
                                const DetectorConfig& config,
                                const TrainStats* stats);

}  // namespace openinc

#endif  // OPENINC_DETECTORS_HPP_
