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

#ifndef OPENINC_TRAINING_HPP_
#define OPENINC_TRAINING_HPP_

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "openinc/data.hpp"
#include "openinc/model.hpp"

namespace openinc {

struct EpochRecord {
  int task = 0;
  int epoch = 0;
  double loss = 0.0;            ///< mean cross-entropy over the epoch
  double train_accuracy = 0.0;  ///< fraction of epoch samples argmax-correct
  double seconds = 0.0;         ///< wall clock of the epoch
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mean cross-entropy and its gradients for one batch on task `task`.
struct BatchGradients {
  double loss = 0.0;
  int correct = 0;
  Eigen::MatrixXd adapter_weight;
  Eigen::VectorXd adapter_bias;
  Eigen::VectorXd embedding;
  Eigen::MatrixXd head_weight;
  Eigen::VectorXd head_bias;
};

/// `trunk_inputs` holds trunk outputs row-wise; `slope` is the HAT slope used
/// for the task's own mask. Gradients are raw (no HAT protection applied).
BatchGradients batch_gradients(const ModelState& model, int task,
                               const Eigen::MatrixXd& trunk_inputs,
                               std::span<const int> labels, double slope);

/// Loss alone, for finite-difference checks.
double batch_loss(const ModelState& model, int task,
                  const Eigen::MatrixXd& trunk_inputs,
                  std::span<const int> labels, double slope);

/// HAT slope at batch b of B: linear from 1/s_max to s_max.
double annealed_slope(int batch, int num_batches, double slope_max);

/// Appends a head and embedding for a new task and fits them, together with
/// the unprotected part of the shared adapter, on `task_data` (local labels).
/// TrainStats for the task are appended at the end.
std::vector<EpochRecord> train_task(ModelState& model, const Dataset& task_data,
                                    const Hyperparams& hp,
                                    const EpochCallback& on_epoch = {});

TrainStats compute_train_stats(const ModelState& model, int task,
                               const Dataset& task_data, const Hyperparams& hp);

/// Statistics from precomputed activations (n x H, rows = samples).
TrainStats fit_train_stats(const Eigen::MatrixXd& activations,
                           std::span<const int> labels, int num_classes,
                           double ridge_factor, double react_percentile);

}  // namespace openinc

#endif  // OPENINC_TRAINING_HPP_
