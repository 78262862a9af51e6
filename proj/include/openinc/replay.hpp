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

// Replay baseline: a class-balanced exemplar buffer, heads with an extra OOD
// logit trained against buffered samples, and back-update of earlier heads.

#ifndef OPENINC_REPLAY_HPP_
#define OPENINC_REPLAY_HPP_

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Core>

#include "openinc/data.hpp"
#include "openinc/model.hpp"
#include "openinc/training.hpp"

namespace openinc {

struct BufferEntry {
  Eigen::VectorXd features;
  int label = 0;  ///< global class id
  int task = 0;   ///< task the sample came from
};

struct Buffer {
  int capacity = 200;
  std::vector<BufferEntry> stored;

  std::size_t size() const { return stored.size(); }
  bool empty() const { return stored.empty(); }
  /// Stored samples per global class id.
  std::map<int, int> class_counts() const;
};

/// Adds task `task` (local labels offset by first_class) and re-balances:
/// every seen class keeps capacity / num_seen (+1 for the lowest ids while the
/// remainder lasts), drawn uniformly without replacement. Classes with too few
/// samples give their unused quota to the others.
Buffer buffer_update(const Buffer& buffer, const Dataset& task_data, int task,
                     int first_class, std::uint64_t seed);

/// Like train_task, but the new head has one extra output that buffered
/// samples are trained towards.
std::vector<EpochRecord> train_task_replay(ModelState& model, const Dataset& task_data,
                                           const Buffer& buffer, const Hyperparams& hp,
                                           const EpochCallback& on_epoch = {});

/// Fine-tunes the weights and bias of every head except the newest on its own
/// buffered samples plus the other tasks' buffered samples as OOD. Adapter and
/// embeddings are untouched. No-op with fewer than two trained tasks.
void back_update(ModelState& model, const Buffer& buffer, const Hyperparams& hp);

}  // namespace openinc

#endif  // OPENINC_REPLAY_HPP_
