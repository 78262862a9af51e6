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

#ifndef OPENINC_DATA_HPP_
#define OPENINC_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace openinc {

/// One labelled feature vector.
struct Sample {
  Eigen::VectorXd features;
  int label = 0;
};

/// Labelled feature vectors stored row-major: row i of features() is sample i.
///
/// Class ids are dense: every id in [0, num_classes) occurs at least once.
/// Immutable after construction.
class Dataset {
 public:
  /// num_classes is inferred as 1 + max label.
  Dataset(Eigen::MatrixXd features, std::vector<int> labels);
  Dataset(Eigen::MatrixXd features, std::vector<int> labels, int num_classes);

  std::size_t size() const { return labels_.size(); }
  int dim() const { return static_cast<int>(features_.cols()); }
  int num_classes() const { return num_classes_; }

  const Eigen::MatrixXd& features() const { return features_; }
  const std::vector<int>& labels() const { return labels_; }
  int label(std::size_t i) const { return labels_[i]; }
  Sample sample(std::size_t i) const;

  /// Positions of the samples of class c, in dataset order.
  std::vector<std::size_t> indices_of(int c) const;
  std::vector<std::size_t> class_counts() const;

  /// Rows at the given positions; keeps num_classes and re-validates.
  Dataset subset(std::span<const std::size_t> rows) const;

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  void validate() const;

  Eigen::MatrixXd features_;
  std::vector<int> labels_;
  int num_classes_ = 0;
};

/// Parameters of the isotropic Gaussian class-mixture generator.
struct SynthSpec {
  int num_classes = 10;
  int dim = 32;
  int per_class = 200;
  double mean_separation = 6.0;  ///< in units of within-class std
  std::uint64_t seed = 0;
};

/// One task of an incremental stream. Labels inside train/test are local,
/// in [0, num_classes); the global id is first_class + local.
struct Task {
  Dataset train;
  Dataset test;
  int first_class = 0;

  int num_classes() const { return train.num_classes(); }
};

class TaskStream {
 public:
  TaskStream(std::vector<Task> tasks, int classes_per_task);

  std::size_t size() const { return tasks_.size(); }
  const Task& operator[](std::size_t t) const { return tasks_[t]; }
  const std::vector<Task>& tasks() const { return tasks_; }
  int classes_per_task() const { return classes_per_task_; }
  int num_classes() const {
    return classes_per_task_ * static_cast<int>(tasks_.size());
  }
  int dim() const { return tasks_.front().train.dim(); }

 private:
  std::vector<Task> tasks_;
  int classes_per_task_;
};

/// Reads `label,f0,...,f{d-1}` CSV with a header row.
Dataset load_csv(const std::filesystem::path& path);

/// Writes the same layout with 9 significant digits.
void save_csv(const Dataset& dataset, const std::filesystem::path& path);

Dataset synth_gaussian(const SynthSpec& spec);

/// Smallest dimension that can host num_classes means at the generator's
/// placement (orthonormal directions, both signs).
int min_synth_dim(int num_classes);

/// Consecutive class blocks: task k owns classes [k*c, (k+1)*c).
TaskStream split_tasks(const Dataset& train, const Dataset& test,
                       int num_tasks);

/// Stratified split: returns (train, test).
std::pair<Dataset, Dataset> holdout(const Dataset& dataset,
                                    double test_fraction, std::uint64_t seed);

}  // namespace openinc

#endif  // OPENINC_DATA_HPP_
