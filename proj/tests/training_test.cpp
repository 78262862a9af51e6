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


#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "openinc/error.hpp"
#include "openinc/model_io.hpp"
#include "openinc/training.hpp"
#include "support.hpp"

namespace openinc {
namespace {

// A model with one head whose parameters are random, for gradient checks.
ModelState random_task_model(Rng& rng, int d, int h, int outputs, int prior_tasks) {
  Hyperparams hp;
  hp.hidden_width = h;
  ModelState m = make_model(d, outputs, hp);
  m.adapters.bias = testing::random_vector(rng, h, -0.5, 0.5);
  for (int t = 0; t <= prior_tasks; ++t) {
    m.adapters.embeddings.push_back(testing::random_vector(rng, h, -0.1, 0.1));
    m.heads.push_back(TaskHead{testing::random_matrix(rng, outputs, h, -0.5, 0.5),
                               testing::random_vector(rng, outputs, -0.5, 0.5), false});
  }
  return m;
}

double relative_error(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale < 1e-10 ? std::abs(a - b) : std::abs(a - b) / scale;
}

// Logistic regression fit by full-batch gradient descent, independent of the
// library's training code.
double logistic_regression_accuracy(const Dataset& d) {
  const Eigen::MatrixXd& x = d.features();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(x.cols());
  double b = 0.0;
  for (int it = 0; it < 500; ++it) {
    Eigen::VectorXd gw = Eigen::VectorXd::Zero(x.cols());
    double gb = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double p = 1.0 / (1.0 + std::exp(-(x.row(i).dot(w) + b)));
      const double err = p - d.label(static_cast<std::size_t>(i));
      gw += err * x.row(i).transpose();
      gb += err;
    }
    w -= 0.1 * gw / static_cast<double>(x.rows());
    b -= 0.1 * gb / static_cast<double>(x.rows());
  }
  int hits = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    hits += ((x.row(i).dot(w) + b > 0.0) ? 1 : 0) == d.label(static_cast<std::size_t>(i));
  }
  return static_cast<double>(hits) / static_cast<double>(x.rows());
}

TEST_CASE("annealed slope runs from 1/smax to smax") {
  CHECK(annealed_slope(0, 5, 400.0) == doctest::Approx(1.0 / 400.0));
  CHECK(annealed_slope(4, 5, 400.0) == 400.0);
  CHECK(annealed_slope(2, 5, 400.0) == doctest::Approx((1.0 / 400.0 + 400.0) / 2.0));
  CHECK(annealed_slope(0, 1, 400.0) == 400.0);
}

TEST_CASE("analytic gradients match central differences") {
  Rng rng(2024);
  for (int trial = 0; trial < 6; ++trial) {
    const int d = 4, h = 6, outputs = 3;
    ModelState m = random_task_model(rng, d, h, outputs, trial % 2);
    const int task = m.trained_tasks() - 1;
    const Eigen::MatrixXd x = testing::random_matrix(rng, 5, d, -2.0, 2.0);
    std::vector<int> y(5);
    for (auto& v : y) v = static_cast<int>(rng.index(outputs));
    const double slope = rng.uniform(0.5, 20.0);
    const BatchGradients g = batch_gradients(m, task, x, y, slope);
    CHECK(g.loss == doctest::Approx(batch_loss(m, task, x, y, slope)).epsilon(1e-14));

    const double step = 1e-6;
    auto numeric = [&](double& param) {
      const double saved = param;
      param = saved + step;
      const double up = batch_loss(m, task, x, y, slope);
      param = saved - step;
      const double down = batch_loss(m, task, x, y, slope);
      param = saved;
      return (up - down) / (2.0 * step);
    };
    auto& head = m.heads.back();
    for (Eigen::Index i = 0; i < head.weight.rows(); ++i) {
      for (Eigen::Index j = 0; j < head.weight.cols(); ++j) {
        CHECK(relative_error(g.head_weight(i, j), numeric(head.weight(i, j))) <= 1e-4);
      }
      CHECK(relative_error(g.head_bias(i), numeric(head.bias(i))) <= 1e-4);
    }
    for (Eigen::Index i = 0; i < h; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        CHECK(relative_error(g.adapter_weight(i, j), numeric(m.adapters.weight(i, j))) <= 1e-4);
      }
      CHECK(relative_error(g.adapter_bias(i), numeric(m.adapters.bias(i))) <= 1e-4);
      CHECK(relative_error(g.embedding(i), numeric(m.adapters.embeddings.back()(i))) <= 1e-4);
    }
  }
}

TEST_CASE("batch gradient preconditions") {
  Rng rng(5);
  const ModelState m = random_task_model(rng, 3, 4, 2, 0);
  const Eigen::MatrixXd x = testing::random_matrix(rng, 2, 3);
  CHECK_THROWS_AS(batch_gradients(m, 0, x, std::vector<int>{0, 2}, 1.0), ArgumentError);
  CHECK_THROWS_AS(batch_gradients(m, 1, x, std::vector<int>{0, 1}, 1.0), ArgumentError);
  CHECK_THROWS_AS(batch_gradients(m, 0, x, std::vector<int>{0}, 1.0), ArgumentError);
  CHECK_THROWS_AS(batch_gradients(m, 0, testing::random_matrix(rng, 2, 2), std::vector<int>{0, 1}, 1.0),
                  ArgumentError);
}

TEST_CASE("separable two-class task is learned") {
  const Dataset d = synth_gaussian({2, 8, 100, 10.0, 4});
  REQUIRE(logistic_regression_accuracy(d) >= 0.99);
  Hyperparams hp;
  ModelState m = make_model(8, 2, hp);
  std::vector<EpochRecord> seen;
  const auto log = train_task(m, d, hp, [&](const EpochRecord& r) { seen.push_back(r); });
  REQUIRE(log.size() == 20);
  CHECK(seen.size() == 20);
  CHECK(log.back().epoch == 20);
  CHECK(log.back().train_accuracy >= 0.99);
  CHECK(log.back().loss < log.front().loss);
  CHECK(m.trained_tasks() == 1);
  CHECK(m.stats.size() == 1);
}

TEST_CASE("training is deterministic") {
  const TaskStream s = testing::synth_stream({4, 6, 40, 6.0, 8}, 2);
  Hyperparams hp;
  hp.epochs = 3;
  CHECK(model_to_string(testing::train_build(s, hp)) ==
        model_to_string(testing::train_build(s, hp)));
  hp.seed = 1;
  ModelState other = testing::train_build(s, hp);
  hp.seed = 0;
  CHECK(model_to_string(other) != model_to_string(testing::train_build(s, hp)));
}

TEST_CASE("parameter isolation across tasks") {
  const TaskStream s = testing::synth_stream({6, 8, 60, 6.0, 12}, 3);
  Hyperparams hp;
  hp.epochs = 5;
  ModelState m = make_model(s.dim(), s.classes_per_task(), hp);
  train_task(m, s[0].train, hp);
  const ModelState after_first = m;
  train_task(m, s[1].train, hp);
  train_task(m, s[2].train, hp);

  CHECK(m.heads[0].weight == after_first.heads[0].weight);
  CHECK(m.heads[0].bias == after_first.heads[0].bias);
  CHECK(m.adapters.embeddings[0] == after_first.adapters.embeddings[0]);
  const Eigen::VectorXd mask = task_mask(after_first, 0);
  int saturated = 0;
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    if (mask(i) != 1.0) continue;
    ++saturated;
    CHECK(m.adapters.weight.row(i) == after_first.adapters.weight.row(i));
    CHECK(m.adapters.bias(i) == after_first.adapters.bias(i));
  }
  CHECK(saturated > 0);
}

TEST_CASE("train_task error paths") {
  Hyperparams hp;
  ModelState m = make_model(3, 2, hp);
  CHECK_THROWS_AS(train_task(m, synth_gaussian({3, 3, 4, 4.0, 1}), hp), ArgumentError);

  hp.learning_rate = 1e300;
  hp.epochs = 50;
  ModelState blown = make_model(3, 2, hp);
  try {
    train_task(blown, synth_gaussian({2, 3, 40, 4.0, 1}), hp);
    FAIL("expected divergence");
  } catch (const TrainingError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("epoch") != std::string::npos);
    CHECK(msg.find("batch") != std::string::npos);
  }
}

TEST_CASE("train stats equal a brute-force recomputation") {
  Rng rng(77);
  const int n = 50, h = 6, classes = 3;
  Eigen::MatrixXd z = testing::random_matrix(rng, n, h, 0.0, 2.0);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = i % classes;
  const TrainStats st = fit_train_stats(z, y, classes, 1e-4, 90.0);

  std::vector<Eigen::VectorXd> mu(classes, Eigen::VectorXd::Zero(h));
  std::vector<int> cnt(classes, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < h; ++j) mu[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])](j) += z(i, j);
    cnt[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])]++;
  }
  for (int c = 0; c < classes; ++c) {
    mu[static_cast<std::size_t>(c)] /= cnt[static_cast<std::size_t>(c)];
    CHECK((st.class_means[static_cast<std::size_t>(c)] - mu[static_cast<std::size_t>(c)]).cwiseAbs().maxCoeff() <= 1e-9);
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(h, h);
  for (int i = 0; i < n; ++i) {
    const auto& m = mu[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])];
    for (int a = 0; a < h; ++a) {
      for (int b = 0; b < h; ++b) cov(a, b) += (z(i, a) - m(a)) * (z(i, b) - m(b)) / n;
    }
  }
  double trace = 0.0;
  for (int a = 0; a < h; ++a) trace += cov(a, a);
  for (int a = 0; a < h; ++a) cov(a, a) += 1e-4 * trace / h;
  CHECK((st.covariance - cov).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((st.covariance * st.precision - Eigen::MatrixXd::Identity(h, h)).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((st.mean_activations - z.colwise().mean().transpose()).cwiseAbs().maxCoeff() <= 1e-9);

  std::vector<double> pooled(z.data(), z.data() + z.size());
  std::sort(pooled.begin(), pooled.end());
  // 90th percentile of 300 values by nearest rank: the 270th smallest.
  CHECK(st.react_threshold == pooled[269]);
}

TEST_CASE("one sample per class gives the absolute ridge") {
  Eigen::MatrixXd z(2, 3);
  z << 1, 0, 2, 0, 3, 1;
  const TrainStats st = fit_train_stats(z, std::vector<int>{0, 1}, 2, 1e-4, 90.0);
  CHECK(st.covariance == Eigen::MatrixXd::Identity(3, 3) * 1e-4);
  CHECK(st.ridge == 1e-4);
}

TEST_CASE("duplicating every sample leaves the stats unchanged") {
  Rng rng(9);
  const Eigen::MatrixXd z = testing::random_matrix(rng, 20, 4, 0.0, 1.0);
  std::vector<int> y(20);
  for (int i = 0; i < 20; ++i) y[static_cast<std::size_t>(i)] = i % 2;
  Eigen::MatrixXd z2(40, 4);
  z2 << z, z;
  std::vector<int> y2 = y;
  y2.insert(y2.end(), y.begin(), y.end());
  const TrainStats a = fit_train_stats(z, y, 2, 1e-4, 90.0);
  const TrainStats b = fit_train_stats(z2, y2, 2, 1e-4, 90.0);
  CHECK((a.covariance - b.covariance).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((a.class_means[1] - b.class_means[1]).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(a.react_threshold == b.react_threshold);
}

}  // namespace
}  // namespace openinc
