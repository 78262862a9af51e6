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

#include "openinc/detectors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "openinc/error.hpp"

namespace openinc {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void check_percentile(double p) {
  if (!(p >= 0.0 && p <= 100.0)) {
    throw ArgumentError("percentile " + std::to_string(p) + " outside [0, 100]");
  }
}

// ceil(numerator / 100) for a product that is integral whenever p is; the
// small slack keeps 0.1 * 10 style round-off from adding a rank.
long ceil_percent(double numerator) {
  return static_cast<long>(std::ceil(numerator / 100.0 - 1e-9));
}

}  // namespace

DetectorConfig DetectorConfig::defaults(Detector kind) {
  switch (kind) {
    case Detector::kBase: return {kind, 0.0};
    case Detector::kReAct: return {kind, 90.0};
    case Detector::kDice: return {kind, 85.0};
    case Detector::kScale: return {kind, 85.0};
  }
  return {kind, 0.0};
}

std::string_view to_string(Detector kind) {
  switch (kind) {
    case Detector::kBase: return "base";
    case Detector::kReAct: return "react";
    case Detector::kDice: return "dice";
    case Detector::kScale: return "scale";
  }
  return "?";
}

Detector parse_detector(std::string_view name) {
  const std::string n = lower(name);
  if (n == "base") return Detector::kBase;
  if (n == "react") return Detector::kReAct;
  if (n == "dice") return Detector::kDice;
  if (n == "scale") return Detector::kScale;
  throw ArgumentError("unknown detector '" + std::string(name) +
                      "' (expected base|react|dice|scale)");
}

double percentile(std::span<const double> values, double p) {
  if (values.empty()) throw ArgumentError("percentile of an empty sequence");
  check_percentile(p);
  std::vector<double> sorted(values.begin(), values.end());
  const auto n = static_cast<long>(sorted.size());
  const long rank = std::clamp(ceil_percent(p * static_cast<double>(n)), 1L, n);
  std::nth_element(sorted.begin(), sorted.begin() + (rank - 1), sorted.end());
  return sorted[static_cast<std::size_t>(rank - 1)];
}

Eigen::VectorXd rectify_react(const Eigen::VectorXd& z, double threshold) {
  if (!(threshold >= 0.0)) throw ArgumentError("ReAct threshold must be >= 0");
  return z.cwiseMin(threshold);
}

Eigen::Index DiceMask::kept_in_row(Eigen::Index row) const {
  return static_cast<Eigen::Index>((keep.row(row).array() != 0.0).count());
}

int dice_kept_count(int width, double p) {
  check_percentile(p);
  const long k = ceil_percent((100.0 - p) * static_cast<double>(width));
  return static_cast<int>(std::clamp(k, 1L, static_cast<long>(width)));
}

DiceMask build_dice_mask(const Eigen::MatrixXd& weight,
                         const Eigen::VectorXd& mean_activations, double p) {
  if (mean_activations.size() != weight.cols()) {
    throw ArgumentError("mean activations have length " +
                        std::to_string(mean_activations.size()) + ", head width is " +
                        std::to_string(weight.cols()));
  }
  const int width = static_cast<int>(weight.cols());
  const int kept = dice_kept_count(width, p);
  DiceMask mask{Eigen::MatrixXd::Zero(weight.rows(), weight.cols())};
  std::vector<int> order(static_cast<std::size_t>(width));
  for (Eigen::Index i = 0; i < weight.rows(); ++i) {
    const Eigen::VectorXd contribution =
        weight.row(i).transpose().cwiseProduct(mean_activations);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return contribution(a) > contribution(b);
    });
    for (int k = 0; k < kept; ++k) mask.keep(i, order[static_cast<std::size_t>(k)]) = 1.0;
  }
  return mask;
}

std::optional<Eigen::VectorXd> rectify_scale(const Eigen::VectorXd& z, double p) {
  if (z.size() == 0 || !(z.maxCoeff() > 0.0)) return std::nullopt;
  const double threshold = percentile(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())), p);
  const double total = z.sum();
  const double top = (z.array() >= threshold).select(z.array(), 0.0).sum();
  return Eigen::VectorXd(z * std::exp(total / top));
}

RectifiedHead::RectifiedHead(const TaskHead& head, const DetectorConfig& config,
                             const TrainStats* stats)
    : head_(&head), config_(config) {
  check_percentile(config.percentile);
  switch (config.kind) {
    case Detector::kBase:
    case Detector::kScale:
      break;
    case Detector::kReAct:
      if (stats == nullptr) throw ArgumentError("ReAct requires training statistics");
      react_threshold_ = stats->react_threshold;
      break;
    case Detector::kDice:
      if (stats == nullptr) throw ArgumentError("DICE requires training statistics");
      weight_ = build_dice_mask(head.weight, stats->mean_activations, config.percentile)
                    .keep.cwiseProduct(head.weight);
      break;
  }
}

Eigen::VectorXd RectifiedHead::logits(const Eigen::VectorXd& z) const {
  switch (config_.kind) {
    case Detector::kBase:
      return head_->logits(z);
    case Detector::kReAct:
      return head_->logits(rectify_react(z, react_threshold_));
    case Detector::kDice:
      return weight_ * z + head_->bias;
    case Detector::kScale: {
      // An all-zero activation has nothing to rescale; it scores as Base.
      const auto scaled = rectify_scale(z, config_.percentile);
      return head_->logits(scaled ? *scaled : z);
    }
  }
  return head_->logits(z);
}

Eigen::VectorXd detector_logits(const TaskHead& head, const Eigen::VectorXd& z,
                                const DetectorConfig& config, const TrainStats* stats) {
  return RectifiedHead(head, config, stats).logits(z);
}

}  // namespace openinc
