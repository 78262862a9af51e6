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

// Inference over a trained multi-head model: every head scores the input, the
// best-scoring head names the task, and that head's unrectified logits name
// the class. Evaluation at step k uses the first k heads, which under
// parameter isolation is the model as it stood after training task k.

#ifndef OPENINC_PIPELINE_HPP_
#define OPENINC_PIPELINE_HPP_

#include <span>
#include <vector>

#include <Eigen/Core>

#include "openinc/data.hpp"
#include "openinc/detectors.hpp"
#include "openinc/metrics.hpp"
#include "openinc/model.hpp"
#include "openinc/scorers.hpp"

namespace openinc {

struct Prediction {
  int task = 0;
  int global_class = 0;
  double score = 0.0;  ///< score of the winning head
};

double head_score(const ModelState& model, int task, const DetectorConfig& detector,
                  const ScorerConfig& scorer, const Eigen::VectorXd& x);

/// Index of the largest score; the lowest index wins ties.
int predict_task(std::span<const double> head_scores);

/// Task over the first `num_heads` heads (all when negative).
int predict_task(const ModelState& model, const DetectorConfig& detector,
                 const ScorerConfig& scorer, const Eigen::VectorXd& x, int num_heads = -1);

/// Class within `task` from the original logits, OOD output excluded.
Prediction predict_class(const ModelState& model, const Eigen::VectorXd& x, int task);

/// predict_task followed by predict_class.
Prediction predict(const ModelState& model, const DetectorConfig& detector,
                   const ScorerConfig& scorer, const Eigen::VectorXd& x, int num_heads = -1);

/// Test samples of tasks [first, last) with global labels.
struct TestSet {
  Eigen::MatrixXd features;
  std::vector<int> labels;  ///< global class ids
  std::vector<int> tasks;

  std::size_t size() const { return labels.size(); }
};

TestSet test_union(const TaskStream& stream, int first_task, int last_task);

/// Detector-independent per-head quantities of a test set.
struct HeadActivations {
  std::vector<Eigen::MatrixXd> z;  ///< per head, n x H
  Eigen::MatrixXi local_class;     ///< n x heads, argmax of original logits
};

HeadActivations compute_activations(const ModelState& model, const Eigen::MatrixXd& x);

/// Per-sample, per-head scores for one (detector, scorer) pair.
struct ScoreTable {
  Eigen::MatrixXd scores;  ///< n x heads
  std::vector<int> labels;
  std::vector<int> tasks;
};

ScoreTable score_table(const ModelState& model, const TestSet& test,
                       const HeadActivations& acts, const DetectorConfig& detector,
                       const ScorerConfig& scorer);

enum class TaskIdMode { kPredicted, kOracle };

struct ClosedResult {
  double accuracy = 0.0;            ///< A^k over tasks 1..k
  std::vector<double> per_task;     ///< A_t^k for t = 1..k
};

/// Closed-world pass after step k (1 <= k <= trained tasks). A sample counts
/// as correct only when its global class is right.
ClosedResult evaluate_closed(const ModelState& model, const TaskStream& stream, int k,
                             const DetectorConfig& detector, const ScorerConfig& scorer,
                             TaskIdMode mode = TaskIdMode::kPredicted);

struct OpenScores {
  std::vector<double> ind;  ///< tasks 1..k
  std::vector<double> ood;  ///< tasks k+1..T
};

/// System score = max over the first k heads. Requires 1 <= k <= T-1.
OpenScores evaluate_open(const ModelState& model, const TaskStream& stream, int k,
                         const DetectorConfig& detector, const ScorerConfig& scorer);

/// Scores and correctness over the whole test stream as seen by model m_k;
/// samples of unseen tasks are never correct.
struct RejectionInputs {
  std::vector<double> scores;
  std::vector<bool> correct;
};

RejectionInputs rejection_inputs(const ModelState& model, const TaskStream& stream, int k,
                                 const DetectorConfig& detector, const ScorerConfig& scorer);

struct ReportRow {
  Detector detector = Detector::kBase;
  Scorer scorer = Scorer::kSM;
  double lca = 0.0;
  double aia = 0.0;
  double af = 0.0;    ///< NaN for single-task streams
  double auc = 0.0;   ///< averaged over steps 1..T-1; NaN when T = 1
  double aupr = 0.0;
  std::vector<double> step_accuracy;              ///< A^k
  std::vector<std::vector<double>> task_accuracy; ///< A_t^k
  std::vector<double> step_auc;
  std::vector<double> step_aupr;
};

struct EvalReport {
  std::vector<ReportRow> rows;  ///< detector-major, scorer-minor
};

EvalReport run_sweep(const ModelState& model, const TaskStream& stream,
                     std::span<const DetectorConfig> detectors,
                     std::span<const ScorerConfig> scorers);

/// Per-task accuracy with the true task id given (TIL mode), k heads.
std::vector<double> evaluate_til(const ModelState& model, const TaskStream& stream, int k);

}  // namespace openinc

#endif  // OPENINC_PIPELINE_HPP_
