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

#include "openinc/replay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "openinc/error.hpp"
#include "openinc/rng.hpp"
#include "training_internal.hpp"

namespace openinc {

std::map<int, int> Buffer::class_counts() const {
  std::map<int, int> counts;
  for (const auto& e : stored) ++counts[e.label];
  return counts;
}

Buffer buffer_update(const Buffer& buffer, const Dataset& task_data, int task,
                     int first_class, std::uint64_t seed) {
  std::map<int, std::vector<BufferEntry>> candidates;
  for (const auto& e : buffer.stored) candidates[e.label].push_back(e);
  for (std::size_t i = 0; i < task_data.size(); ++i) {
    const Sample s = task_data.sample(i);
    candidates[first_class + s.label].push_back(BufferEntry{s.features, first_class + s.label, task});
  }

  const auto seen = static_cast<int>(candidates.size());
  if (buffer.capacity < seen) {
    throw ArgumentError("buffer capacity " + std::to_string(buffer.capacity) +
                        " is below the " + std::to_string(seen) + " seen classes");
  }

  // Round-robin in class-id order: balanced to within one sample, extra
  // slots go to the lowest ids, exhausted classes drop out.
  std::map<int, std::size_t> quota;
  for (const auto& [label, items] : candidates) quota[label] = 0;
  int remaining = buffer.capacity;
  bool progressed = true;
  while (remaining > 0 && progressed) {
    progressed = false;
    for (auto& [label, q] : quota) {
      if (remaining == 0) break;
      if (q < candidates[label].size()) {
        ++q;
        --remaining;
        progressed = true;
      }
    }
  }

  Rng rng = Rng::stream(seed, "buffer", static_cast<std::uint64_t>(task));
  Buffer out;
  out.capacity = buffer.capacity;
  for (auto& [label, items] : candidates) {
    std::vector<std::size_t> idx(items.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(idx));
    idx.resize(quota[label]);
    std::sort(idx.begin(), idx.end());
    for (std::size_t i : idx) out.stored.push_back(std::move(items[i]));
  }
  return out;
}

std::vector<EpochRecord> train_task_replay(ModelState& model, const Dataset& task_data,
                                           const Buffer& buffer, const Hyperparams& hp,
                                           const EpochCallback& on_epoch) {
  hp.validate();
  const int classes = model.classes_per_task;
  if (task_data.num_classes() != classes) {
    throw ArgumentError("task data has " + std::to_string(task_data.num_classes()) +
                        " classes, model expects " + std::to_string(classes));
  }

  const auto n_task = static_cast<Eigen::Index>(task_data.size());
  const auto n_buf = static_cast<Eigen::Index>(buffer.size());
  Eigen::MatrixXd x(n_task + n_buf, task_data.dim());
  x.topRows(n_task) = task_data.features();
  std::vector<int> labels = task_data.labels();
  for (Eigen::Index i = 0; i < n_buf; ++i) {
    const auto& e = buffer.stored[static_cast<std::size_t>(i)];
    if (e.features.size() != task_data.dim()) {
      throw ArgumentError("buffered sample has dim " + std::to_string(e.features.size()));
    }
    x.row(n_task + i) = e.features.transpose();
    labels.push_back(classes);  // the OOD output
  }

  const Eigen::MatrixXd trunk_inputs = model.trunk.apply_rows(x);
  append_task(model, classes + 1, true, hp);
  auto log = fit_current_task(model, trunk_inputs, labels, hp, on_epoch);
  model.stats.push_back(compute_train_stats(model, model.trained_tasks() - 1, task_data, hp));
  return log;
}

void back_update(ModelState& model, const Buffer& buffer, const Hyperparams& hp) {
  hp.validate();
  const int trained = model.trained_tasks();
  if (trained < 2) return;
  if (buffer.empty()) throw ArgumentError("back-update needs a non-empty buffer");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(buffer.size()), model.input_dim());
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = buffer.stored[i].features.transpose();
  }

  for (int j = 0; j + 1 < trained; ++j) {
    TaskHead& head = model.heads[static_cast<std::size_t>(j)];
    if (!head.ood_logit) {
      throw ArgumentError("head " + std::to_string(j) + " has no OOD output to back-update");
    }
    const int ood = head.num_classes();
    std::vector<int> labels;
    labels.reserve(buffer.size());
    for (const auto& e : buffer.stored) {
      labels.push_back(e.task == j ? e.label - j * model.classes_per_task : ood);
    }
    const Eigen::MatrixXd z = forward_features_rows(model, j, x);

    const std::size_t n = labels.size();
    const auto bs = static_cast<std::size_t>(hp.batch_size);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = Rng::stream(hp.seed, "backupdate",
                          static_cast<std::uint64_t>(trained) * 1000003ULL +
                              static_cast<std::uint64_t>(j));
    for (int epoch = 0; epoch < hp.backupdate_epochs; ++epoch) {
      rng.shuffle(std::span<std::size_t>(order));
      for (std::size_t lo = 0; lo < n; lo += bs) {
        const std::size_t hi = std::min(n, lo + bs);
        const std::span<const std::size_t> rows(order.data() + lo, hi - lo);
        const Eigen::MatrixXd zb = gather_rows(z, rows);
        std::vector<int> y;
        for (std::size_t r : rows) y.push_back(labels[r]);

        Eigen::MatrixXd probs = zb * head.weight.transpose();
        probs.rowwise() += head.bias.transpose();
        const double loss = softmax_cross_entropy(probs, y, nullptr);
        if (!std::isfinite(loss)) {
          throw TrainingError("non-finite loss in back-update of head " + std::to_string(j) +
                              ", epoch " + std::to_string(epoch + 1));
        }
        for (std::size_t i = 0; i < y.size(); ++i) probs(static_cast<Eigen::Index>(i), y[i]) -= 1.0;
        probs /= static_cast<double>(y.size());
        head.weight -= hp.learning_rate * (probs.transpose() * zb);
        head.bias -= hp.learning_rate * probs.colwise().sum().transpose();
      }
    }
  }
}

}  // namespace openinc
