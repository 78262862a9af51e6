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

// Shared between the buffer-free and the replay training paths.

#ifndef OPENINC_SRC_TRAINING_INTERNAL_HPP_
#define OPENINC_SRC_TRAINING_INTERNAL_HPP_

#include <span>
#include <vector>

#include <Eigen/Core>

#include "openinc/model.hpp"
#include "openinc/training.hpp"

namespace openinc {

/// Replaces each row of `logits` by its softmax; returns mean cross-entropy.
double softmax_cross_entropy(Eigen::MatrixXd& logits, std::span<const int> labels,
                             int* correct);

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x, std::span<const std::size_t> rows);

/// Pushes a freshly initialised head and embedding for the next task.
void append_task(ModelState& model, int outputs, bool ood_logit, const Hyperparams& hp);

/// SGD with HAT protection on the most recently appended task.
std::vector<EpochRecord> fit_current_task(ModelState& model,
                                          const Eigen::MatrixXd& trunk_inputs,
                                          const std::vector<int>& labels,
                                          const Hyperparams& hp,
                                          const EpochCallback& on_epoch);

}  // namespace openinc

#endif  // OPENINC_SRC_TRAINING_INTERNAL_HPP_
