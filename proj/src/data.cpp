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

#include "openinc/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <Eigen/QR>

#include "openinc/error.hpp"
#include "openinc/rng.hpp"

namespace openinc {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  for (auto& f : fields) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) {
      f.remove_suffix(1);
    }
  }
  return fields;
}

std::string at_row(std::size_t row) { return " at row " + std::to_string(row); }

int max_label(const std::vector<int>& labels) {
  return labels.empty() ? -1 : *std::max_element(labels.begin(), labels.end());
}

}  // namespace

Dataset::Dataset(Eigen::MatrixXd features, std::vector<int> labels)
    : Dataset(std::move(features), labels, max_label(labels) + 1) {}

Dataset::Dataset(Eigen::MatrixXd features, std::vector<int> labels,
                 int num_classes)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      num_classes_(num_classes) {
  validate();
}

void Dataset::validate() const {
  if (static_cast<std::size_t>(features_.rows()) != labels_.size()) {
    throw DataError("dataset has " + std::to_string(features_.rows()) +
                    " feature rows but " + std::to_string(labels_.size()) +
                    " labels");
  }
  if (labels_.empty()) throw DataError("dataset is empty");
  if (features_.cols() < 1) throw DataError("dataset has zero feature dimension");
  std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(num_classes_, 0)), 0);
  for (int y : labels_) {
    if (y < 0 || y >= num_classes_) {
      throw DataError("label " + std::to_string(y) + " outside [0, " +
                      std::to_string(num_classes_) + ")");
    }
    ++counts[static_cast<std::size_t>(y)];
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) {
      throw DataError("class " + std::to_string(c) + " has no samples (num_classes = " +
                      std::to_string(num_classes_) + ")");
    }
  }
  if (!features_.allFinite()) throw DataError("dataset contains non-finite features");
}

Sample Dataset::sample(std::size_t i) const {
  return Sample{features_.row(static_cast<Eigen::Index>(i)).transpose(), labels_[i]};
}

std::vector<std::size_t> Dataset::indices_of(int c) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == c) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes_), 0);
  for (int y : labels_) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), features_.cols());
  std::vector<int> y;
  y.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    x.row(static_cast<Eigen::Index>(r)) = features_.row(static_cast<Eigen::Index>(rows[r]));
    y.push_back(labels_[rows[r]]);
  }
  return Dataset(std::move(x), std::move(y), num_classes_);
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.num_classes_ == b.num_classes_ && a.labels_ == b.labels_ &&
         a.features_.rows() == b.features_.rows() &&
         a.features_.cols() == b.features_.cols() && a.features_ == b.features_;
}

TaskStream::TaskStream(std::vector<Task> tasks, int classes_per_task)
    : tasks_(std::move(tasks)), classes_per_task_(classes_per_task) {
  if (tasks_.empty()) throw DataError("task stream has no tasks");
  for (std::size_t t = 0; t < tasks_.size(); ++t) {
    const Task& task = tasks_[t];
    if (task.num_classes() != classes_per_task_ ||
        task.test.num_classes() != classes_per_task_) {
      throw DataError("task " + std::to_string(t) + " does not hold " +
                      std::to_string(classes_per_task_) + " classes");
    }
    // Blocks must tile [0, C) in order, which makes label sets disjoint.
    if (task.first_class != static_cast<int>(t) * classes_per_task_) {
      throw DataError("task " + std::to_string(t) + " starts at class " +
                      std::to_string(task.first_class) + ", overlapping or out of order");
    }
  }
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());

  std::string line;
  std::size_t row = 0;
  std::size_t width = 0;
  std::vector<double> values;
  std::vector<int> labels;

  while (std::getline(in, line)) {
    ++row;
    std::string_view view(line);
    if (view.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const auto fields = split_fields(view);
    if (width == 0) {
      if (fields.size() < 2 || fields[0] != "label") {
        throw DataError("malformed header" + at_row(row) +
                        ": expected label,f0,...,f{d-1}");
      }
      width = fields.size();
      continue;
    }
    if (fields.size() != width) {
      throw DataError("inconsistent width" + at_row(row) + ": expected " +
                      std::to_string(width) + " fields, got " +
                      std::to_string(fields.size()));
    }
    int label = 0;
    {
      const auto f = fields[0];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), label);
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size() || label < 0) {
        throw DataError("malformed label '" + std::string(f) + "'" + at_row(row));
      }
    }
    labels.push_back(label);
    for (std::size_t j = 1; j < width; ++j) {
      const auto f = fields[j];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
        throw DataError("non-numeric field '" + std::string(f) + "'" + at_row(row) +
                        ", column " + std::to_string(j + 1));
      }
      values.push_back(v);
    }
  }
  if (width == 0) throw DataError("empty file " + path.string());
  if (labels.empty()) throw DataError("no data rows in " + path.string());

  const auto n = static_cast<Eigen::Index>(labels.size());
  const auto d = static_cast<Eigen::Index>(width - 1);
  Eigen::MatrixXd features =
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          values.data(), n, d);
  return Dataset(std::move(features), std::move(labels));
}

void save_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "label";
  for (int j = 0; j < dataset.dim(); ++j) out << ",f" << j;
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out << dataset.label(i);
    for (int j = 0; j < dataset.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.9g",
                    dataset.features()(static_cast<Eigen::Index>(i), j));
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

int min_synth_dim(int num_classes) { return (num_classes + 1) / 2; }

Dataset synth_gaussian(const SynthSpec& spec) {
  if (spec.num_classes < 2) throw ArgumentError("synth: num_classes must be >= 2");
  if (spec.per_class < 2) throw ArgumentError("synth: per_class must be >= 2");
  if (!(spec.mean_separation > 0.0)) {
    throw ArgumentError("synth: mean_separation must be > 0");
  }
  if (spec.dim < 1 || spec.dim < min_synth_dim(spec.num_classes)) {
    throw ArgumentError("synth: dim " + std::to_string(spec.dim) + " cannot host " +
                        std::to_string(spec.num_classes) +
                        " separated means; minimum feasible dim is " +
                        std::to_string(min_synth_dim(spec.num_classes)));
  }

  // Means are +/- scaled orthonormal directions. Orthogonal pairs sit at
  // exactly mean_separation, antipodal pairs at sqrt(2) times that.
  Rng mean_rng = Rng::stream(spec.seed, "means");
  Eigen::MatrixXd gauss(spec.dim, spec.dim);
  for (int j = 0; j < spec.dim; ++j) {
    for (int i = 0; i < spec.dim; ++i) gauss(i, j) = mean_rng.normal();
  }
  const Eigen::MatrixXd basis = Eigen::HouseholderQR<Eigen::MatrixXd>(gauss).householderQ();
  const double scale = spec.mean_separation / std::sqrt(2.0);

  Rng sample_rng = Rng::stream(spec.seed, "samples");
  const Eigen::Index n = static_cast<Eigen::Index>(spec.num_classes) * spec.per_class;
  Eigen::MatrixXd x(n, spec.dim);
  std::vector<int> y;
  y.reserve(static_cast<std::size_t>(n));
  Eigen::Index row = 0;
  for (int c = 0; c < spec.num_classes; ++c) {
    const Eigen::VectorXd mean =
        c < spec.dim ? Eigen::VectorXd(scale * basis.col(c))
                     : Eigen::VectorXd(-scale * basis.col(c - spec.dim));
    for (int k = 0; k < spec.per_class; ++k, ++row) {
      for (int j = 0; j < spec.dim; ++j) x(row, j) = mean(j) + sample_rng.normal();
      y.push_back(c);
    }
  }
  return Dataset(std::move(x), std::move(y), spec.num_classes);
}

TaskStream split_tasks(const Dataset& train, const Dataset& test, int num_tasks) {
  if (num_tasks < 1) throw ArgumentError("num_tasks must be >= 1");
  if (train.dim() != test.dim()) {
    throw DataError("train dim " + std::to_string(train.dim()) + " != test dim " +
                    std::to_string(test.dim()));
  }
  if (train.num_classes() != test.num_classes()) {
    throw DataError("train has " + std::to_string(train.num_classes()) +
                    " classes, test has " + std::to_string(test.num_classes()));
  }
  if (train.num_classes() % num_tasks != 0) {
    throw DataError(std::to_string(train.num_classes()) +
                    " classes are not divisible into " + std::to_string(num_tasks) +
                    " tasks");
  }
  const int per_task = train.num_classes() / num_tasks;

  auto block = [per_task](const Dataset& ds, int first) {
    std::vector<std::size_t> rows;
    std::vector<int> local;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const int y = ds.label(i);
      if (y >= first && y < first + per_task) {
        rows.push_back(i);
        local.push_back(y - first);
      }
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), ds.dim());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      x.row(static_cast<Eigen::Index>(r)) = ds.features().row(static_cast<Eigen::Index>(rows[r]));
    }
    return Dataset(std::move(x), std::move(local), per_task);
  };

  std::vector<Task> tasks;
  tasks.reserve(static_cast<std::size_t>(num_tasks));
  for (int k = 0; k < num_tasks; ++k) {
    const int first = k * per_task;
    tasks.push_back(Task{block(train, first), block(test, first), first});
  }
  return TaskStream(std::move(tasks), per_task);
}

std::pair<Dataset, Dataset> holdout(const Dataset& dataset, double test_fraction,
                                    std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ArgumentError("test_fraction must lie in (0, 1)");
  }
  Rng rng = Rng::stream(seed, "holdout");
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  for (int c = 0; c < dataset.num_classes(); ++c) {
    std::vector<std::size_t> idx = dataset.indices_of(c);
    const std::size_t n = idx.size();
    if (n < 2) {
      throw DataError("class " + std::to_string(c) + " has " + std::to_string(n) +
                      " sample(s); holdout needs at least 2");
    }
    // Both sides keep every class, so the count is clamped to [1, n-1].
    auto n_test = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * test_fraction + 1e-9));
    n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
    rng.shuffle(std::span<std::size_t>(idx));
    test_rows.insert(test_rows.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    train_rows.insert(train_rows.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {dataset.subset(train_rows), dataset.subset(test_rows)};
}

}  // namespace openinc
