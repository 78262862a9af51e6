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

#include "openinc/training.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Cholesky>

#include "openinc/detectors.hpp"
#include "openinc/error.hpp"
#include "openinc/rng.hpp"
#include "training_internal.hpp"

namespace openinc {

namespace {

struct Forward {
  Eigen::VectorXd mask;
  Eigen::MatrixXd pre;     // n x H
  Eigen::MatrixXd hidden;  // ReLU(pre)
  Eigen::MatrixXd z;       // hidden * mask
  Eigen::MatrixXd probs;   // n x C softmax
  double loss = 0.0;
  int correct = 0;
};

Forward forward_batch(const ModelState& model, int task,
                      const Eigen::MatrixXd& trunk_inputs,
                      std::span<const int> labels, double slope) {
  const auto t = static_cast<std::size_t>(task);
  const TaskHead& head = model.heads[t];
  Forward f;
  f.mask = hat_mask(model.adapters.embeddings[t], slope);
  f.pre = trunk_inputs * model.adapters.weight.transpose();
  f.pre.rowwise() += model.adapters.bias.transpose();
  f.hidden = f.pre.cwiseMax(0.0);
  f.z = f.hidden * f.mask.asDiagonal();
  f.probs = f.z * head.weight.transpose();
  f.probs.rowwise() += head.bias.transpose();
  f.loss = softmax_cross_entropy(f.probs, labels, &f.correct);
  return f;
}

void check_batch(const ModelState& model, int task, const Eigen::MatrixXd& trunk_inputs,
                 std::span<const int> labels) {
  if (task < 0 || task >= model.trained_tasks() ||
      task >= static_cast<int>(model.adapters.embeddings.size())) {
    throw ArgumentError("unknown task " + std::to_string(task));
  }
  if (trunk_inputs.cols() != model.adapters.weight.cols()) {
    throw ArgumentError("batch has width " + std::to_string(trunk_inputs.cols()) +
                        ", adapter expects " + std::to_string(model.adapters.weight.cols()));
  }
  if (static_cast<std::size_t>(trunk_inputs.rows()) != labels.size() || labels.empty()) {
    throw ArgumentError("batch rows and labels disagree or are empty");
  }
  const int outputs = model.heads[static_cast<std::size_t>(task)].num_outputs();
  for (int y : labels) {
    if (y < 0 || y >= outputs) {
      throw ArgumentError("label " + std::to_string(y) + " outside task range [0, " +
                          std::to_string(outputs) + ")");
    }
  }
}

}  // namespace

double softmax_cross_entropy(Eigen::MatrixXd& logits, std::span<const int> labels,
                             int* correct) {
  const auto n = logits.rows();
  double loss = 0.0;
  int hits = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    const double m = logits.row(i).maxCoeff(&best);  // first max wins ties
    logits.row(i).array() = (logits.row(i).array() - m).exp();
    const double sum = logits.row(i).sum();
    logits.row(i) /= sum;
    const int y = labels[static_cast<std::size_t>(i)];
    loss -= std::log(logits(i, y));
    if (best == y) ++hits;
  }
  if (correct != nullptr) *correct = hits;
  return loss / static_cast<double>(n);
}

double annealed_slope(int batch, int num_batches, double slope_max) {
  if (num_batches <= 1) return slope_max;
  const double lo = 1.0 / slope_max;
  return lo + (slope_max - lo) * static_cast<double>(batch) /
                  static_cast<double>(num_batches - 1);
}

BatchGradients batch_gradients(const ModelState& model, int task,
                               const Eigen::MatrixXd& trunk_inputs,
                               std::span<const int> labels, double slope) {
  check_batch(model, task, trunk_inputs, labels);
  const TaskHead& head = model.heads[static_cast<std::size_t>(task)];
  Forward f = forward_batch(model, task, trunk_inputs, labels, slope);
  const auto n = static_cast<double>(labels.size());

  // dL/dlogits = (softmax - onehot) / n
  Eigen::MatrixXd g = f.probs;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    g(static_cast<Eigen::Index>(i), labels[i]) -= 1.0;
  }
  g /= n;

  BatchGradients out;
  out.loss = f.loss;
  out.correct = f.correct;
  out.head_weight = g.transpose() * f.z;
  out.head_bias = g.colwise().sum().transpose();

  const Eigen::MatrixXd dz = g * head.weight;  // n x H
  const Eigen::VectorXd dmask = dz.cwiseProduct(f.hidden).colwise().sum().transpose();
  out.embedding = dmask.cwiseProduct(
      (slope * f.mask.array() * (1.0 - f.mask.array())).matrix());

  const Eigen::MatrixXd dpre =
      ((dz * f.mask.asDiagonal()).array() * (f.pre.array() > 0.0).cast<double>()).matrix();
  out.adapter_weight = dpre.transpose() * trunk_inputs;
  out.adapter_bias = dpre.colwise().sum().transpose();
  return out;
}

double batch_loss(const ModelState& model, int task, const Eigen::MatrixXd& trunk_inputs,
                  std::span<const int> labels, double slope) {
  check_batch(model, task, trunk_inputs, labels);
  return forward_batch(model, task, trunk_inputs, labels, slope).loss;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x, std::span<const std::size_t> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(rows[r]));
  }
  return out;
}

void append_task(ModelState& model, int outputs, bool ood_logit, const Hyperparams& hp) {
  const int h = model.hidden_width();
  const auto t = static_cast<std::uint64_t>(model.trained_tasks());

  Rng emb_rng = Rng::stream(hp.seed, "embedding", t);
  Eigen::VectorXd e(h);
  for (int i = 0; i < h; ++i) e(i) = emb_rng.uniform(-0.1, 0.1);

  Rng head_rng = Rng::stream(hp.seed, "head", t);
  const double bound = 1.0 / std::sqrt(static_cast<double>(h));
  TaskHead head;
  head.weight.resize(outputs, h);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < outputs; ++i) head.weight(i, j) = head_rng.uniform(-bound, bound);
  }
  head.bias = Eigen::VectorXd::Zero(outputs);
  head.ood_logit = ood_logit;

  model.adapters.embeddings.push_back(std::move(e));
  model.heads.push_back(std::move(head));
}

std::vector<EpochRecord> fit_current_task(ModelState& model,
                                          const Eigen::MatrixXd& trunk_inputs,
                                          const std::vector<int>& labels,
                                          const Hyperparams& hp,
                                          const EpochCallback& on_epoch) {
  const int task = model.trained_tasks() - 1;
  const auto t = static_cast<std::size_t>(task);

  std::vector<Eigen::VectorXd> prev_masks;
  for (int p = 0; p < task; ++p) prev_masks.push_back(task_mask(model, p));
  const Eigen::VectorXd keep = hat_protection(model.hidden_width(), prev_masks);

  const std::size_t n = labels.size();
  const auto bs = static_cast<std::size_t>(hp.batch_size);
  const int num_batches = static_cast<int>((n + bs - 1) / bs);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng::stream(hp.seed, "batching", static_cast<std::uint64_t>(task));

  std::vector<EpochRecord> log;
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    int correct = 0;
    for (int b = 0; b < num_batches; ++b) {
      const std::size_t lo = static_cast<std::size_t>(b) * bs;
      const std::size_t hi = std::min(n, lo + bs);
      const std::span<const std::size_t> rows(order.data() + lo, hi - lo);
      std::vector<int> y;
      y.reserve(rows.size());
      for (std::size_t r : rows) y.push_back(labels[r]);

      const double slope = annealed_slope(b, num_batches, hp.slope_max);
      const BatchGradients g =
          batch_gradients(model, task, gather_rows(trunk_inputs, rows), y, slope);
      if (!std::isfinite(g.loss)) {
        throw TrainingError("non-finite loss at task " + std::to_string(task) +
                            ", epoch " + std::to_string(epoch + 1) + ", batch " +
                            std::to_string(b + 1));
      }
      loss_sum += g.loss * static_cast<double>(rows.size());
      correct += g.correct;

      const double lr = hp.learning_rate;
      model.adapters.weight -= lr * (keep.asDiagonal() * g.adapter_weight);
      model.adapters.bias -= lr * keep.cwiseProduct(g.adapter_bias);
      model.adapters.embeddings[t] -= lr * g.embedding;
      model.heads[t].weight -= lr * g.head_weight;
      model.heads[t].bias -= lr * g.head_bias;
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    EpochRecord rec{task, epoch + 1, loss_sum / static_cast<double>(n),
                    static_cast<double>(correct) / static_cast<double>(n), elapsed.count()};
    if (on_epoch) on_epoch(rec);
    log.push_back(rec);
  }
  return log;
}

std::vector<EpochRecord> train_task(ModelState& model, const Dataset& task_data,
                                    const Hyperparams& hp, const EpochCallback& on_epoch) {
  hp.validate();
  if (task_data.num_classes() != model.classes_per_task) {
    throw ArgumentError("task data has " + std::to_string(task_data.num_classes()) +
                        " classes, model expects " + std::to_string(model.classes_per_task));
  }
  const Eigen::MatrixXd trunk_inputs = model.trunk.apply_rows(task_data.features());
  append_task(model, model.classes_per_task, false, hp);
  auto log = fit_current_task(model, trunk_inputs, task_data.labels(), hp, on_epoch);
  model.stats.push_back(compute_train_stats(model, model.trained_tasks() - 1, task_data, hp));
  return log;
}

TrainStats compute_train_stats(const ModelState& model, int task, const Dataset& task_data,
                               const Hyperparams& hp) {
  if (task < 0 || task >= model.trained_tasks()) {
    throw ArgumentError("no trained head for task " + std::to_string(task));
  }
  const Eigen::MatrixXd z = forward_features_rows(model, task, task_data.features());
  return fit_train_stats(z, task_data.labels(), task_data.num_classes(), hp.covariance_ridge,
                         hp.react_percentile);
}

TrainStats fit_train_stats(const Eigen::MatrixXd& activations, std::span<const int> labels,
                           int num_classes, double ridge_factor, double react_percentile) {
  const auto n = activations.rows();
  const auto h = activations.cols();
  if (n == 0 || static_cast<std::size_t>(n) != labels.size()) {
    throw ArgumentError("activations and labels disagree or are empty");
  }

  TrainStats stats;
  std::vector<double> counts(static_cast<std::size_t>(num_classes), 0.0);
  stats.class_means.assign(static_cast<std::size_t>(num_classes), Eigen::VectorXd::Zero(h));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto y = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
    stats.class_means[y] += activations.row(i).transpose();
    counts[y] += 1.0;
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0.0) throw TrainingError("class " + std::to_string(c) + " has no samples");
    stats.class_means[c] /= counts[c];
  }

  Eigen::MatrixXd centered(n, h);
  for (Eigen::Index i = 0; i < n; ++i) {
    centered.row(i) = activations.row(i) -
        stats.class_means[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])].transpose();
  }
  Eigen::MatrixXd scatter = centered.transpose() * centered / static_cast<double>(n);
  const double trace = scatter.trace();
  // Zero scatter (one sample per class) falls back to an absolute ridge.
  stats.ridge = trace > 0.0 ? ridge_factor * trace / static_cast<double>(h) : ridge_factor;
  stats.covariance = scatter;
  stats.covariance.diagonal().array() += stats.ridge;

  Eigen::LLT<Eigen::MatrixXd> llt(stats.covariance);
  if (llt.info() != Eigen::Success) {
    throw TrainingError("covariance is singular after ridge eps=" + std::to_string(stats.ridge));
  }
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(h, h));
  stats.precision = 0.5 * (inv + inv.transpose());

  stats.mean_activations = activations.colwise().mean().transpose();
  stats.react_percentile = react_percentile;
  stats.react_threshold = percentile(
      std::span<const double>(activations.data(), static_cast<std::size_t>(activations.size())),
      react_percentile);
  return stats;
}

}  // namespace openinc
