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

#include "openinc/scorers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "openinc/error.hpp"

namespace openinc {

namespace {

Eigen::Index resolve_count(const Eigen::VectorXd& logits, Eigen::Index ind_count) {
  if (logits.size() == 0) throw ArgumentError("empty logit vector");
  if (!logits.allFinite()) throw ArgumentError("non-finite logit");
  if (ind_count < 0) return logits.size();
  if (ind_count == 0 || ind_count > logits.size()) {
    throw ArgumentError("in-distribution count outside the logit vector");
  }
  return ind_count;
}

const TrainStats& require(const TrainStats* stats) {
  if (stats == nullptr || stats->class_means.empty() || stats->precision.size() == 0) {
    throw ArgumentError("Mahalanobis scoring requires training statistics");
  }
  return *stats;
}

}  // namespace

std::string_view to_string(Scorer kind) {
  switch (kind) {
    case Scorer::kSM: return "sm";
    case Scorer::kSMMD: return "smmd";
    case Scorer::kEN: return "en";
    case Scorer::kENMD: return "enmd";
  }
  return "?";
}

Scorer parse_scorer(std::string_view name) {
  std::string n(name);
  for (char& c : n) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (n == "sm") return Scorer::kSM;
  if (n == "smmd") return Scorer::kSMMD;
  if (n == "en") return Scorer::kEN;
  if (n == "enmd") return Scorer::kENMD;
  throw ArgumentError("unknown scorer '" + std::string(name) + "' (expected sm|smmd|en|enmd)");
}

double score_sm(const Eigen::VectorXd& logits, Eigen::Index ind_count) {
  const Eigen::Index k = resolve_count(logits, ind_count);
  const double m = logits.maxCoeff();
  const Eigen::ArrayXd e = (logits.array() - m).exp();
  return e.head(k).maxCoeff() / e.sum();
}

double score_energy(const Eigen::VectorXd& logits, double temperature) {
  if (!(temperature > 0.0)) throw ArgumentError("temperature must be positive");
  resolve_count(logits, -1);
  const Eigen::ArrayXd f = logits.array() / temperature;
  const double m = f.maxCoeff();
  return temperature * (m + std::log((f - m).exp().sum()));
}

double mahalanobis_confidence(const Eigen::VectorXd& z, const TrainStats& stats) {
  const TrainStats& st = require(&stats);
  if (z.size() != st.precision.rows()) {
    throw ArgumentError("activation has length " + std::to_string(z.size()) +
                        ", statistics expect " + std::to_string(st.precision.rows()));
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& mu : st.class_means) {
    const Eigen::VectorXd d = z - mu;
    best = std::max(best, -d.dot(st.precision * d));
  }
  return best;
}

double md_coefficient(const Eigen::VectorXd& z, const TrainStats& stats) {
  // Round-off can leave the quadratic form a hair below zero at a class mean.
  const double d_min = std::max(0.0, -mahalanobis_confidence(z, stats));
  return 1.0 / (1.0 + d_min);
}

double score_combined(const ScorerConfig& config, const Eigen::VectorXd& logits,
                      const Eigen::VectorXd& z, const TrainStats* stats,
                      Eigen::Index ind_count) {
  const Eigen::Index k = resolve_count(logits, ind_count);
  switch (config.kind) {
    case Scorer::kSM:
      return score_sm(logits, k);
    case Scorer::kSMMD:
      return score_sm(logits, k) * md_coefficient(z, require(stats));
    case Scorer::kEN:
      return score_energy(logits.head(k), config.temperature);
    case Scorer::kENMD:
      return score_energy(logits.head(k), config.temperature) +
             std::log(md_coefficient(z, require(stats)));
  }
  return 0.0;
}

}  // namespace openinc
