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

#include "openinc/pipeline.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "openinc/error.hpp"

namespace openinc {

namespace {

int argmax_prefix(const Eigen::Ref<const Eigen::RowVectorXd>& v, Eigen::Index count) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < count; ++j) {
    if (v(j) > v(best)) best = j;
  }
  return static_cast<int>(best);
}

int local_argmax(const TaskHead& head, const Eigen::VectorXd& z) {
  const Eigen::RowVectorXd logits = head.logits(z).transpose();
  return argmax_prefix(logits, head.num_classes());
}

void check_stream(const ModelState& model, const TaskStream& stream) {
  if (stream.dim() != model.input_dim()) {
    throw ArgumentError("stream has dim " + std::to_string(stream.dim()) +
                        ", model expects " + std::to_string(model.input_dim()));
  }
  if (stream.classes_per_task() != model.classes_per_task) {
    throw ArgumentError("stream has " + std::to_string(stream.classes_per_task()) +
                        " classes per task, model has " +
                        std::to_string(model.classes_per_task));
  }
}

void check_step(const ModelState& model, const TaskStream& stream, int k) {
  check_stream(model, stream);
  if (k < 1 || k > model.trained_tasks() || k > static_cast<int>(stream.size())) {
    throw ArgumentError("step " + std::to_string(k) + " outside [1, " +
                        std::to_string(std::min<int>(model.trained_tasks(),
                                                     static_cast<int>(stream.size()))) +
                        "]");
  }
}

ClosedResult closed_from_table(const ScoreTable& table, const HeadActivations& acts,
                               int k, TaskIdMode mode, int classes_per_task) {
  std::vector<double> seen(static_cast<std::size_t>(k), 0.0);
  std::vector<double> hits(static_cast<std::size_t>(k), 0.0);
  for (std::size_t i = 0; i < table.labels.size(); ++i) {
    const int t = table.tasks[i];
    if (t >= k) continue;
    const auto row = static_cast<Eigen::Index>(i);
    const int t_hat = mode == TaskIdMode::kOracle ? t : argmax_prefix(table.scores.row(row), k);
    const int global = t_hat * classes_per_task + acts.local_class(row, t_hat);
    seen[static_cast<std::size_t>(t)] += 1.0;
    if (global == table.labels[i]) hits[static_cast<std::size_t>(t)] += 1.0;
  }
  ClosedResult result;
  double total_seen = 0.0;
  double total_hits = 0.0;
  for (std::size_t t = 0; t < seen.size(); ++t) {
    result.per_task.push_back(seen[t] > 0.0 ? hits[t] / seen[t] : 0.0);
    total_seen += seen[t];
    total_hits += hits[t];
  }
  result.accuracy = total_seen > 0.0 ? total_hits / total_seen : 0.0;
  return result;
}

OpenScores open_from_table(const ScoreTable& table, int k) {
  OpenScores out;
  for (std::size_t i = 0; i < table.labels.size(); ++i) {
    const double s = table.scores.row(static_cast<Eigen::Index>(i)).head(k).maxCoeff();
    (table.tasks[i] < k ? out.ind : out.ood).push_back(s);
  }
  return out;
}

double mean_or_nan(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double head_score(const ModelState& model, int task, const DetectorConfig& detector,
                  const ScorerConfig& scorer, const Eigen::VectorXd& x) {
  if (task < 0 || task >= model.trained_tasks()) {
    throw ArgumentError("unknown task " + std::to_string(task));
  }
  const auto t = static_cast<std::size_t>(task);
  const TaskHead& head = model.heads[t];
  const TrainStats& stats = model.stats[t];
  const Eigen::VectorXd z = forward_features(model, task, x);
  const Eigen::VectorXd logits = detector_logits(head, z, detector, &stats);
  return score_combined(scorer, logits, z, &stats, head.num_classes());
}

int predict_task(std::span<const double> head_scores) {
  if (head_scores.empty()) throw ArgumentError("no head scores");
  std::size_t best = 0;
  for (std::size_t t = 1; t < head_scores.size(); ++t) {
    if (head_scores[t] > head_scores[best]) best = t;
  }
  return static_cast<int>(best);
}

int predict_task(const ModelState& model, const DetectorConfig& detector,
                 const ScorerConfig& scorer, const Eigen::VectorXd& x, int num_heads) {
  const int heads = num_heads < 0 ? model.trained_tasks() : num_heads;
  if (heads < 1 || heads > model.trained_tasks()) throw ArgumentError("no trained heads");
  std::vector<double> scores;
  for (int t = 0; t < heads; ++t) scores.push_back(head_score(model, t, detector, scorer, x));
  return predict_task(scores);
}

Prediction predict_class(const ModelState& model, const Eigen::VectorXd& x, int task) {
  if (task < 0 || task >= model.trained_tasks()) {
    throw ArgumentError("unknown task " + std::to_string(task));
  }
  const Eigen::VectorXd z = forward_features(model, task, x);
  const int local = local_argmax(model.heads[static_cast<std::size_t>(task)], z);
  return Prediction{task, task * model.classes_per_task + local,
                    std::numeric_limits<double>::quiet_NaN()};
}

Prediction predict(const ModelState& model, const DetectorConfig& detector,
                   const ScorerConfig& scorer, const Eigen::VectorXd& x, int num_heads) {
  const int heads = num_heads < 0 ? model.trained_tasks() : num_heads;
  if (heads < 1 || heads > model.trained_tasks()) throw ArgumentError("no trained heads");
  std::vector<double> scores;
  for (int t = 0; t < heads; ++t) scores.push_back(head_score(model, t, detector, scorer, x));
  const int task = predict_task(scores);
  Prediction p = predict_class(model, x, task);
  p.score = scores[static_cast<std::size_t>(task)];
  return p;
}

TestSet test_union(const TaskStream& stream, int first_task, int last_task) {
  if (first_task < 0 || last_task > static_cast<int>(stream.size()) || first_task >= last_task) {
    throw ArgumentError("task range [" + std::to_string(first_task) + ", " +
                        std::to_string(last_task) + ") is empty or out of bounds");
  }
  Eigen::Index rows = 0;
  for (int t = first_task; t < last_task; ++t) {
    rows += static_cast<Eigen::Index>(stream[static_cast<std::size_t>(t)].test.size());
  }
  TestSet out;
  out.features.resize(rows, stream.dim());
  Eigen::Index r = 0;
  for (int t = first_task; t < last_task; ++t) {
    const Task& task = stream[static_cast<std::size_t>(t)];
    const auto n = static_cast<Eigen::Index>(task.test.size());
    out.features.middleRows(r, n) = task.test.features();
    for (int y : task.test.labels()) {
      out.labels.push_back(task.first_class + y);
      out.tasks.push_back(t);
    }
    r += n;
  }
  return out;
}

HeadActivations compute_activations(const ModelState& model, const Eigen::MatrixXd& x) {
  HeadActivations acts;
  const int heads = model.trained_tasks();
  acts.local_class.resize(x.rows(), heads);
  for (int t = 0; t < heads; ++t) {
    acts.z.push_back(forward_features_rows(model, t, x));
    const TaskHead& head = model.heads[static_cast<std::size_t>(t)];
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      acts.local_class(i, t) = local_argmax(head, acts.z.back().row(i).transpose());
    }
  }
  return acts;
}

ScoreTable score_table(const ModelState& model, const TestSet& test,
                       const HeadActivations& acts, const DetectorConfig& detector,
                       const ScorerConfig& scorer) {
  const auto heads = static_cast<int>(acts.z.size());
  const auto n = static_cast<Eigen::Index>(test.size());
  ScoreTable table;
  table.scores.resize(n, heads);
  table.labels = test.labels;
  table.tasks = test.tasks;
  for (int t = 0; t < heads; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    const TaskHead& head = model.heads[ti];
    const TrainStats& stats = model.stats[ti];
    const RectifiedHead rectified(head, detector, &stats);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd z = acts.z[ti].row(i).transpose();
      table.scores(i, t) =
          score_combined(scorer, rectified.logits(z), z, &stats, head.num_classes());
    }
  }
  return table;
}

ClosedResult evaluate_closed(const ModelState& model, const TaskStream& stream, int k,
                             const DetectorConfig& detector, const ScorerConfig& scorer,
                             TaskIdMode mode) {
  check_step(model, stream, k);
  const TestSet test = test_union(stream, 0, k);
  ModelState prefix = model;
  prefix.heads.resize(static_cast<std::size_t>(k));
  prefix.stats.resize(static_cast<std::size_t>(k));
  prefix.adapters.embeddings.resize(static_cast<std::size_t>(k));
  const HeadActivations acts = compute_activations(prefix, test.features);
  const ScoreTable table = score_table(prefix, test, acts, detector, scorer);
  return closed_from_table(table, acts, k, mode, model.classes_per_task);
}

OpenScores evaluate_open(const ModelState& model, const TaskStream& stream, int k,
                         const DetectorConfig& detector, const ScorerConfig& scorer) {
  check_step(model, stream, k);
  if (k >= static_cast<int>(stream.size())) {
    throw ArgumentError("open-world evaluation at step " + std::to_string(k) +
                        " leaves no unseen tasks");
  }
  const TestSet test = test_union(stream, 0, static_cast<int>(stream.size()));
  ModelState prefix = model;
  prefix.heads.resize(static_cast<std::size_t>(k));
  prefix.stats.resize(static_cast<std::size_t>(k));
  prefix.adapters.embeddings.resize(static_cast<std::size_t>(k));
  const HeadActivations acts = compute_activations(prefix, test.features);
  return open_from_table(score_table(prefix, test, acts, detector, scorer), k);
}

RejectionInputs rejection_inputs(const ModelState& model, const TaskStream& stream, int k,
                                 const DetectorConfig& detector, const ScorerConfig& scorer) {
  check_step(model, stream, k);
  const TestSet test = test_union(stream, 0, static_cast<int>(stream.size()));
  const HeadActivations acts = compute_activations(model, test.features);
  const ScoreTable table = score_table(model, test, acts, detector, scorer);
  RejectionInputs out;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const int t_hat = argmax_prefix(table.scores.row(row), k);
    out.scores.push_back(table.scores.row(row).head(k).maxCoeff());
    const int global = t_hat * model.classes_per_task + acts.local_class(row, t_hat);
    out.correct.push_back(test.tasks[i] < k && global == test.labels[i]);
  }
  return out;
}

EvalReport run_sweep(const ModelState& model, const TaskStream& stream,
                     std::span<const DetectorConfig> detectors,
                     std::span<const ScorerConfig> scorers) {
  check_stream(model, stream);
  const int steps = static_cast<int>(stream.size());
  if (model.trained_tasks() != steps) {
    throw ArgumentError("model has " + std::to_string(model.trained_tasks()) +
                        " trained tasks, stream has " + std::to_string(steps));
  }
  const TestSet test = test_union(stream, 0, steps);
  const HeadActivations acts = compute_activations(model, test.features);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  EvalReport report;
  for (const DetectorConfig& det : detectors) {
    for (const ScorerConfig& sc : scorers) {
      const ScoreTable table = score_table(model, test, acts, det, sc);
      ReportRow row;
      row.detector = det.kind;
      row.scorer = sc.kind;
      for (int k = 1; k <= steps; ++k) {
        const ClosedResult closed =
            closed_from_table(table, acts, k, TaskIdMode::kPredicted, model.classes_per_task);
        row.step_accuracy.push_back(closed.accuracy);
        row.task_accuracy.push_back(closed.per_task);
        if (k < steps) {
          const OpenScores open = open_from_table(table, k);
          row.step_auc.push_back(auc(open.ind, open.ood));
          row.step_aupr.push_back(aupr(open.ind, open.ood));
        }
      }
      row.lca = lca(row.step_accuracy);
      row.aia = aia(row.step_accuracy);
      row.af = steps >= 2 ? af(row.task_accuracy) : nan;
      row.auc = mean_or_nan(row.step_auc);
      row.aupr = mean_or_nan(row.step_aupr);
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

std::vector<double> evaluate_til(const ModelState& model, const TaskStream& stream, int k) {
  check_step(model, stream, k);
  std::vector<double> out;
  for (int t = 0; t < k; ++t) {
    const Dataset& test = stream[static_cast<std::size_t>(t)].test;
    const Eigen::MatrixXd z = forward_features_rows(model, t, test.features());
    const TaskHead& head = model.heads[static_cast<std::size_t>(t)];
    double hits = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      if (local_argmax(head, z.row(static_cast<Eigen::Index>(i)).transpose()) == test.label(i)) {
        hits += 1.0;
      }
    }
    out.push_back(hits / static_cast<double>(test.size()));
  }
  return out;
}

}  // namespace openinc
