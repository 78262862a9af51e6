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
#include <map>
#include <string>

#include "doctest.h"
#include "openinc/data.hpp"
#include "openinc/error.hpp"
#include "support.hpp"

namespace openinc {
namespace {

using testing::TempDir;
using testing::write_text;

std::string error_text(const std::string& csv) {
  TempDir dir;
  write_text(dir.file("d.csv"), csv);
  try {
    load_csv(dir.file("d.csv"));
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

Eigen::VectorXd class_mean(const Dataset& d, int c) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(d.dim());
  const auto rows = d.indices_of(c);
  for (auto r : rows) m += d.features().row(static_cast<Eigen::Index>(r)).transpose();
  return m / static_cast<double>(rows.size());
}

TEST_CASE("dataset rejects inconsistent construction") {
  Eigen::MatrixXd x(2, 1);
  x << 1.0, 2.0;
  CHECK_THROWS_AS(Dataset(x, {0}), DataError);
  CHECK_THROWS_AS(Dataset(Eigen::MatrixXd(0, 1), {}), DataError);
  CHECK_THROWS_AS(Dataset(x, {0, -1}), DataError);
  CHECK_THROWS_AS(Dataset(x, {0, 2}, 2), DataError);
  Eigen::MatrixXd bad = x;
  bad(1, 0) = std::nan("");
  CHECK_THROWS_AS(Dataset(bad, {0, 0}), DataError);

  const Dataset ok(x, {1, 0});
  CHECK(ok.num_classes() == 2);
  CHECK(ok.class_counts() == std::vector<std::size_t>{1, 1});
  CHECK(ok.sample(0).label == 1);
}

TEST_CASE("labels {0,2} leave class 1 empty") {
  const std::string msg = error_text("label,f0\n0,1.0\n2,2.0\n");
  CHECK(msg.find("class 1 has no samples") != std::string::npos);
}

TEST_CASE("csv errors carry the row") {
  CHECK(error_text("label,f0,f1\n0,1,2\n1,1,2,3\n").find("inconsistent width at row 3") !=
        std::string::npos);
  CHECK(error_text("label,f0\n0,abc\n").find("non-numeric field 'abc' at row 2, column 2") !=
        std::string::npos);
  CHECK(error_text("label,f0\nx,1\n").find("malformed label 'x' at row 2") != std::string::npos);
  CHECK(error_text("x,f0\n0,1\n").find("malformed header at row 1") != std::string::npos);
  CHECK(error_text("").find("empty file") != std::string::npos);
  CHECK(error_text("label,f0\n").find("no data rows") != std::string::npos);
}

TEST_CASE("csv round trip and blank lines") {
  TempDir dir;
  write_text(dir.file("a.csv"), "label,f0,f1\n\n1,0.5,-2\r\n0,1.25,3e2\n\n");
  const Dataset d = load_csv(dir.file("a.csv"));
  REQUIRE(d.size() == 2);
  CHECK(d.features()(1, 1) == 300.0);
  CHECK(d.labels() == std::vector<int>{1, 0});

  save_csv(d, dir.file("b.csv"));
  CHECK(load_csv(dir.file("b.csv")) == d);
  CHECK_THROWS_AS(load_csv(dir.file("missing.csv")), DataError);
}

TEST_CASE("synth: two far classes") {
  SynthSpec spec{2, 2, 3, 8.0, 1};
  const Dataset d = synth_gaussian(spec);
  CHECK(d.size() == 6);
  CHECK((class_mean(d, 0) - class_mean(d, 1)).norm() >= 8.0 - 3.0);
  CHECK(synth_gaussian(spec) == d);

  TempDir dir;
  save_csv(d, dir.file("a.csv"));
  save_csv(synth_gaussian(spec), dir.file("b.csv"));
  CHECK(testing::read_text(dir.file("a.csv")) == testing::read_text(dir.file("b.csv")));
}

TEST_CASE("synth preconditions") {
  CHECK_THROWS_AS(synth_gaussian({2, 2, 3, 0.0, 1}), ArgumentError);
  CHECK_THROWS_AS(synth_gaussian({1, 2, 3, 1.0, 1}), ArgumentError);
  CHECK(min_synth_dim(10) == 5);
  try {
    synth_gaussian({10, 4, 3, 1.0, 1});
    FAIL("expected an error");
  } catch (const ArgumentError& e) {
    CHECK(std::string(e.what()).find("5") != std::string::npos);
  }
  CHECK_NOTHROW(synth_gaussian({10, 5, 3, 1.0, 1}));
}

TEST_CASE("synth: empirical means keep the requested separation") {
  // With 2000 draws per class the empirical mean sits within ~0.15 of the true mean
  // in 8 dims, so pairwise distances stay above sep - 0.5.
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    SynthSpec spec{6, 8, 2000, 3.0 + static_cast<double>(seed), seed};
    const Dataset d = synth_gaussian(spec);
    for (int a = 0; a < spec.num_classes; ++a) {
      for (int b = a + 1; b < spec.num_classes; ++b) {
        CHECK((class_mean(d, a) - class_mean(d, b)).norm() >= spec.mean_separation - 0.5);
      }
    }
  }
}

TEST_CASE("synth: unit within-class spread") {
  const Dataset d = synth_gaussian({2, 4, 5000, 6.0, 3});
  const Eigen::VectorXd mu = class_mean(d, 0);
  double ss = 0.0;
  const auto rows = d.indices_of(0);
  for (auto r : rows) ss += (d.features().row(static_cast<Eigen::Index>(r)).transpose() - mu).squaredNorm();
  CHECK(ss / static_cast<double>(rows.size() * 4) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("split_tasks produces contiguous class blocks with local labels") {
  const Dataset d = synth_gaussian({6, 3, 4, 5.0, 2});
  const TaskStream s = split_tasks(d, d, 3);
  REQUIRE(s.size() == 3);
  CHECK(s.classes_per_task() == 2);
  CHECK(s.num_classes() == 6);
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(s[t].first_class == static_cast<int>(2 * t));
    CHECK(s[t].train.num_classes() == 2);
    CHECK(s[t].train.size() == 8);
    // Original order within the task: class-major generation puts local 0 first.
    CHECK(s[t].train.label(0) == 0);
    CHECK(s[t].train.features().row(0) ==
          d.features().row(static_cast<Eigen::Index>(8 * t)));
  }
  CHECK_THROWS_AS(split_tasks(d, d, 4), DataError);
  const Dataset other = synth_gaussian({6, 4, 4, 5.0, 2});
  CHECK_THROWS_AS(split_tasks(d, other, 3), DataError);
}

TEST_CASE("holdout is stratified, disjoint and deterministic") {
  const Dataset d = synth_gaussian({4, 3, 10, 5.0, 9});
  const auto [train, test] = holdout(d, 0.2, 5);
  CHECK(test.class_counts() == std::vector<std::size_t>{2, 2, 2, 2});
  CHECK(train.class_counts() == std::vector<std::size_t>{8, 8, 8, 8});

  std::map<std::vector<double>, int> seen;
  auto add = [&](const Dataset& part) {
    for (std::size_t i = 0; i < part.size(); ++i) {
      const auto row = part.features().row(static_cast<Eigen::Index>(i));
      seen[std::vector<double>(row.begin(), row.end())] += 1;
    }
  };
  add(train);
  add(test);
  CHECK(seen.size() == d.size());

  const auto again = holdout(d, 0.2, 5);
  CHECK(again.first == train);
  CHECK(again.second == test);

  // Tiny classes still land in both splits.
  const auto [tr2, te2] = holdout(synth_gaussian({2, 1, 2, 5.0, 1}), 0.9, 1);
  CHECK(tr2.size() == 2);
  CHECK(te2.size() == 2);
  CHECK_THROWS_AS(holdout(d, 0.0, 1), ArgumentError);
}

}  // namespace
}  // namespace openinc
