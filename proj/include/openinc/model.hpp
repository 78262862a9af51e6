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

#ifndef OPENINC_MODEL_HPP_
#define OPENINC_MODEL_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace openinc {

/// Optimisation and architecture settings. Defaults follow the 5-task profile.
struct Hyperparams {
  int epochs = 20;
  double learning_rate = 0.005;
  int batch_size = 64;
  int hidden_width = 64;      ///< adapter bottleneck H
  int trunk_dim = 0;          ///< 0 selects the identity trunk
  std::uint64_t seed = 0;
  double slope_max = 400.0;
  double covariance_ridge = 1e-4;  ///< relative to trace(cov) / H
  double react_percentile = 90.0;
  int backupdate_epochs = 10;

  void validate() const;
};

/// Frozen feature trunk: either identity or a fixed random projection.
struct TrunkParams {
  int input_dim = 0;
  bool identity = true;
  Eigen::MatrixXd projection;  ///< output_dim x input_dim, empty when identity

  int output_dim() const {
    return identity ? input_dim : static_cast<int>(projection.rows());
  }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  /// Row-wise application to an n x input_dim batch.
  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& x) const;
};

/// Shared ReLU adapter, gated per task by a HAT mask sigma(slope * e^t).
struct AdapterBank {
  Eigen::MatrixXd weight;  ///< H x trunk_dim; row i feeds hidden unit i
  Eigen::VectorXd bias;    ///< H
  std::vector<Eigen::VectorXd> embeddings;  ///< one per task, length H
  double slope_max = 400.0;

  int hidden_width() const { return static_cast<int>(bias.size()); }
};

/// Linear classifier of one task. Baseline heads carry a trailing OOD logit.
struct TaskHead {
  Eigen::MatrixXd weight;  ///< outputs x H
  Eigen::VectorXd bias;
  bool ood_logit = false;

  int num_outputs() const { return static_cast<int>(bias.size()); }
  /// In-distribution classes, i.e. outputs without the OOD logit.
  int num_classes() const { return num_outputs() - (ood_logit ? 1 : 0); }
  Eigen::VectorXd logits(const Eigen::VectorXd& z) const { return weight * z + bias; }
};

/// Per-task statistics recorded at the end of training; all that inference
/// needs besides the weights.
struct TrainStats {
  std::vector<Eigen::VectorXd> class_means;
  Eigen::MatrixXd covariance;  ///< tied, ridge included
  Eigen::MatrixXd precision;   ///< inverse of covariance
  Eigen::VectorXd mean_activations;
  double react_threshold = 0.0;
  double react_percentile = 90.0;
  double ridge = 0.0;  ///< absolute ridge that was added to the diagonal
};

class ModelState {
 public:
  ModelState() = default;

  TrunkParams trunk;
  AdapterBank adapters;
  std::vector<TaskHead> heads;
  std::vector<TrainStats> stats;
  int classes_per_task = 0;

  int trained_tasks() const { return static_cast<int>(heads.size()); }
  int input_dim() const { return trunk.input_dim; }
  int hidden_width() const { return adapters.hidden_width(); }

  /// Throws FormatError when head, stats and embedding counts disagree.
  void check_consistent() const;
};

/// Fresh model: trunk fixed and adapter initialised from the "init" stream.
ModelState make_model(int input_dim, int classes_per_task, const Hyperparams& hp);

/// Elementwise logistic gate 1 / (1 + exp(-slope * e)).
Eigen::VectorXd hat_mask(const Eigen::VectorXd& embedding, double slope);

/// Saturated (slope = slope_max) mask of a trained task.
Eigen::VectorXd task_mask(const ModelState& model, int task);

/// Scales row i of grad (the components feeding hidden unit i) by
/// 1 - max over prev_masks of a_i. Identity when prev_masks is empty.
Eigen::MatrixXd hat_gradient_gate(const Eigen::MatrixXd& grad,
                                  std::span<const Eigen::VectorXd> prev_masks);

/// Per-unit factor applied by hat_gradient_gate.
Eigen::VectorXd hat_protection(int hidden_width,
                               std::span<const Eigen::VectorXd> prev_masks);

/// z_t = ReLU(W_a (trunk x) + b_a) * a^t with the saturated mask of task t.
Eigen::VectorXd forward_features(const ModelState& model, int task,
                                 const Eigen::VectorXd& x);

/// Row-wise forward_features over an n x input_dim batch (n x H result).
Eigen::MatrixXd forward_features_rows(const ModelState& model, int task,
                                      const Eigen::MatrixXd& x);

}  // namespace openinc

#endif  // OPENINC_MODEL_HPP_
