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


// Shared fixtures for the unit and acceptance tests.

#ifndef OPENINC_TESTS_SUPPORT_HPP_
#define OPENINC_TESTS_SUPPORT_HPP_

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "openinc/data.hpp"
#include "openinc/model.hpp"
#include "openinc/rng.hpp"
#include "openinc/training.hpp"

namespace openinc::testing {

inline Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                                     double lo = -1.0, double hi = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
  }
  return m;
}

inline Eigen::VectorXd random_vector(Rng& rng, Eigen::Index n, double lo = -1.0,
                                     double hi = 1.0) {
  return random_matrix(rng, n, 1, lo, hi).col(0);
}

inline std::vector<double> random_scores(Rng& rng, std::size_t n, int levels = 0) {
  std::vector<double> v(n);
  for (auto& s : v) {
    // A small number of levels forces ties.
    s = levels > 0 ? static_cast<double>(rng.index(static_cast<std::size_t>(levels)))
                   : rng.normal();
  }
  return v;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("openinc_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline TaskStream synth_stream(const SynthSpec& spec, int num_tasks,
                               double test_fraction = 0.2) {
  const Dataset all = synth_gaussian(spec);
  const auto [train, test] = holdout(all, test_fraction, spec.seed);
  return split_tasks(train, test, num_tasks);
}

/// The 10-class, 5-task profile used by the end-to-end checks.
inline SynthSpec reference_spec(std::uint64_t seed = 7) {
  SynthSpec spec;
  spec.num_classes = 10;
  spec.dim = 32;
  spec.per_class = 200;
  spec.mean_separation = 6.0;
  spec.seed = seed;
  return spec;
}

inline ModelState train_build(const TaskStream& stream, const Hyperparams& hp) {
  ModelState model = make_model(stream.dim(), stream.classes_per_task(), hp);
  for (std::size_t t = 0; t < stream.size(); ++t) train_task(model, stream[t].train, hp);
  return model;
}

/// Nearest-class-mean classifier fit on raw features: an upper reference for
/// what any model can reach on the synthetic streams.
inline double ncm_accuracy(const Dataset& train, const Dataset& test) {
  const int c = train.num_classes();
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(c, train.dim());
  std::vector<double> counts(static_cast<std::size_t>(c), 0.0);
  for (std::size_t i = 0; i < train.size(); ++i) {
    means.row(train.label(i)) += train.features().row(static_cast<Eigen::Index>(i));
    counts[static_cast<std::size_t>(train.label(i))] += 1.0;
  }
  for (int k = 0; k < c; ++k) means.row(k) /= counts[static_cast<std::size_t>(k)];
  int hits = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto x = test.features().row(static_cast<Eigen::Index>(i));
    int best = 0;
    double best_d = (x - means.row(0)).squaredNorm();
    for (int k = 1; k < c; ++k) {
      const double d = (x - means.row(k)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    if (best == test.label(i)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

}  // namespace openinc::testing

#endif  // OPENINC_TESTS_SUPPORT_HPP_
