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

#include "openinc/model.hpp"

#include <cmath>
#include <string>

#include "openinc/error.hpp"
#include "openinc/rng.hpp"

namespace openinc {

void Hyperparams::validate() const {
  if (epochs < 1) throw ArgumentError("epochs must be positive");
  if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
  if (batch_size < 1) throw ArgumentError("batch size must be positive");
  if (hidden_width < 1) throw ArgumentError("hidden width must be positive");
  if (trunk_dim < 0) throw ArgumentError("trunk dim must be >= 0 (0 = identity)");
  if (!(slope_max > 0.0)) throw ArgumentError("slope_max must be positive");
  if (!(covariance_ridge > 0.0)) throw ArgumentError("covariance ridge must be positive");
  if (!(react_percentile >= 0.0 && react_percentile <= 100.0)) {
    throw ArgumentError("react percentile must lie in [0, 100]");
  }
  if (backupdate_epochs < 1) throw ArgumentError("back-update epochs must be positive");
}

Eigen::VectorXd TrunkParams::apply(const Eigen::VectorXd& x) const {
  if (x.size() != input_dim) {
    throw ArgumentError("input has dim " + std::to_string(x.size()) + ", model expects " +
                        std::to_string(input_dim));
  }
  return identity ? x : Eigen::VectorXd(projection * x);
}

Eigen::MatrixXd TrunkParams::apply_rows(const Eigen::MatrixXd& x) const {
  if (x.cols() != input_dim) {
    throw ArgumentError("input has dim " + std::to_string(x.cols()) + ", model expects " +
                        std::to_string(input_dim));
  }
  return identity ? x : Eigen::MatrixXd(x * projection.transpose());
}

void ModelState::check_consistent() const {
  const auto n = heads.size();
  if (stats.size() != n || adapters.embeddings.size() != n) {
    throw FormatError("model has " + std::to_string(n) + " heads, " +
                      std::to_string(stats.size()) + " stats entries and " +
                      std::to_string(adapters.embeddings.size()) + " embeddings");
  }
  const int h = hidden_width();
  if (adapters.weight.rows() != h || adapters.weight.cols() != trunk.output_dim()) {
    throw FormatError("adapter weight shape does not match hidden width / trunk");
  }
  for (std::size_t t = 0; t < n; ++t) {
    if (heads[t].weight.cols() != h || heads[t].weight.rows() != heads[t].bias.size() ||
        adapters.embeddings[t].size() != h) {
      throw FormatError("head " + std::to_string(t) + " does not match hidden width");
    }
  }
}

ModelState make_model(int input_dim, int classes_per_task, const Hyperparams& hp) {
  hp.validate();
  if (input_dim < 1) throw ArgumentError("input dim must be positive");
  if (classes_per_task < 1) throw ArgumentError("classes per task must be positive");

  ModelState model;
  model.classes_per_task = classes_per_task;
  model.trunk.input_dim = input_dim;
  model.trunk.identity = hp.trunk_dim == 0;
  if (!model.trunk.identity) {
    Rng rng = Rng::stream(hp.seed, "trunk");
    const double scale = 1.0 / std::sqrt(static_cast<double>(input_dim));
    model.trunk.projection.resize(hp.trunk_dim, input_dim);
    for (int j = 0; j < input_dim; ++j) {
      for (int i = 0; i < hp.trunk_dim; ++i) model.trunk.projection(i, j) = scale * rng.normal();
    }
  }

  const int d = model.trunk.output_dim();
  Rng rng = Rng::stream(hp.seed, "init");
  const double scale = std::sqrt(2.0 / static_cast<double>(d));  // He init
  model.adapters.weight.resize(hp.hidden_width, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < hp.hidden_width; ++i) model.adapters.weight(i, j) = scale * rng.normal();
  }
  model.adapters.bias = Eigen::VectorXd::Zero(hp.hidden_width);
  model.adapters.slope_max = hp.slope_max;
  return model;
}

Eigen::VectorXd hat_mask(const Eigen::VectorXd& embedding, double slope) {
  return ((-slope * embedding.array()).exp() + 1.0).inverse().matrix();
}

Eigen::VectorXd task_mask(const ModelState& model, int task) {
  if (task < 0 || task >= static_cast<int>(model.adapters.embeddings.size())) {
    throw ArgumentError("unknown task " + std::to_string(task));
  }
  return hat_mask(model.adapters.embeddings[static_cast<std::size_t>(task)],
                  model.adapters.slope_max);
}

Eigen::VectorXd hat_protection(int hidden_width,
                               std::span<const Eigen::VectorXd> prev_masks) {
  Eigen::VectorXd claimed = Eigen::VectorXd::Zero(hidden_width);
  for (const auto& m : prev_masks) claimed = claimed.cwiseMax(m);
  return Eigen::VectorXd::Ones(hidden_width) - claimed;
}

Eigen::MatrixXd hat_gradient_gate(const Eigen::MatrixXd& grad,
                                  std::span<const Eigen::VectorXd> prev_masks) {
  if (prev_masks.empty()) return grad;
  const Eigen::VectorXd keep = hat_protection(static_cast<int>(grad.rows()), prev_masks);
  return keep.asDiagonal() * grad;
}

namespace {

Eigen::VectorXd masked_activation(const ModelState& model, const Eigen::VectorXd& mask,
                                  const Eigen::VectorXd& x) {
  const Eigen::VectorXd u = model.trunk.apply(x);
  const Eigen::VectorXd pre = model.adapters.weight * u + model.adapters.bias;
  return pre.cwiseMax(0.0).cwiseProduct(mask);
}

}  // namespace

Eigen::VectorXd forward_features(const ModelState& model, int task,
                                 const Eigen::VectorXd& x) {
  return masked_activation(model, task_mask(model, task), x);
}

// Row by row through the same kernel so batch and single-sample results are
// bit-identical.
Eigen::MatrixXd forward_features_rows(const ModelState& model, int task,
                                      const Eigen::MatrixXd& x) {
  const Eigen::VectorXd mask = task_mask(model, task);
  Eigen::MatrixXd z(x.rows(), model.hidden_width());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    z.row(i) = masked_activation(model, mask, x.row(i).transpose()).transpose();
  }
  return z;
}

}  // namespace openinc
