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

#include "openinc/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "openinc/data.hpp"
#include "openinc/detectors.hpp"
#include "openinc/error.hpp"
#include "openinc/metrics.hpp"
#include "openinc/model.hpp"
#include "openinc/model_io.hpp"
#include "openinc/pipeline.hpp"
#include "openinc/replay.hpp"
#include "openinc/scorers.hpp"
#include "openinc/training.hpp"

namespace openinc::cli {

namespace {

namespace fs = std::filesystem;

/// Bad flags or configuration detected before any work starts (exit 1).
class UsageError : public Error {
 public:
  using Error::Error;
};

struct SynthOptions {
  SynthSpec spec;
  double test_fraction = 0.2;
  std::string out_dir;
};

struct TrainOptions {
  std::string train_csv;
  int tasks = 5;
  Hyperparams hp;
  bool replay = false;
  int buffer = 200;
  bool backupdate = false;
  std::string model_path = "model.txt";
  std::string log_path;
};

struct EvalOptions {
  std::string model_path;
  std::string test_csv;
  std::vector<std::string> detectors{"base", "react", "dice", "scale"};
  std::vector<std::string> scorers{"sm", "smmd", "en", "enmd"};
  double dice_percentile = 85.0;
  double scale_percentile = 85.0;
  double temperature = 1.0;
  std::string out_path;
};

struct CurveOptions {
  std::string model_path;
  std::string test_csv;
  std::vector<int> steps;
  std::string detector = "base";
  std::string scorer = "enmd";
  double dice_percentile = 85.0;
  double scale_percentile = 85.0;
  double temperature = 1.0;
  int grid = 5;
  std::string out_path;
};

/// Reads flat key=value files and files every unsectioned key under the
/// subcommand being run, so `eval --config f` may say `scorers=enmd`.
class FlatConfig : public CLI::ConfigINI {
 public:
  explicit FlatConfig(const CLI::App* app) : app_(app) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigINI::from_config(input);
    const auto active = app_->get_subcommands();
    if (active.empty()) return items;
    for (auto& item : items) {
      if (item.parents.empty()) item.parents = {active.front()->get_name()};
    }
    return items;
  }

 private:
  const CLI::App* app_;
};

void require_writable_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw UsageError("output directory " + parent.string() + " does not exist");
  }
}

std::string format_percent(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

DetectorConfig detector_config(const std::string& name, double dice_p, double scale_p) {
  DetectorConfig cfg = DetectorConfig::defaults(parse_detector(name));
  if (cfg.kind == Detector::kDice) cfg.percentile = dice_p;
  if (cfg.kind == Detector::kScale) cfg.percentile = scale_p;
  if (!(cfg.percentile >= 0.0 && cfg.percentile <= 100.0)) {
    throw UsageError("percentile for " + name + " outside [0, 100]");
  }
  return cfg;
}

/// Loads the test CSV and checks it against the model before any scoring.
TaskStream compatible_stream(const ModelState& model, const std::string& test_csv) {
  const Dataset test = load_csv(test_csv);
  const int expected = model.classes_per_task * model.trained_tasks();
  if (test.dim() != model.input_dim()) {
    throw UsageError("test data has dim " + std::to_string(test.dim()) + ", model expects " +
                     std::to_string(model.input_dim()));
  }
  if (test.num_classes() != expected) {
    throw UsageError("test data has " + std::to_string(test.num_classes()) +
                     " classes, model covers " + std::to_string(expected));
  }
  return split_tasks(test, test, model.trained_tasks());
}

int cmd_synth(const SynthOptions& o) {
  try {
    if (o.spec.num_classes < 2 || o.spec.per_class < 2 || !(o.spec.mean_separation > 0.0) ||
        o.spec.dim < min_synth_dim(o.spec.num_classes)) {
      synth_gaussian(o.spec);  // throws with the precise reason
    }
    if (!(o.test_fraction > 0.0 && o.test_fraction < 1.0)) {
      throw UsageError("test fraction must lie in (0, 1)");
    }
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  fs::create_directories(o.out_dir);
  const Dataset all = synth_gaussian(o.spec);
  const auto [train, test] = holdout(all, o.test_fraction, o.spec.seed);
  save_csv(train, fs::path(o.out_dir) / "train.csv");
  save_csv(test, fs::path(o.out_dir) / "test.csv");
  std::cout << "synth: " << o.spec.num_classes << " classes, dim " << o.spec.dim << ", "
            << train.size() << " train / " << test.size() << " test samples -> "
            << o.out_dir << "\n";
  return kExitOk;
}

int cmd_train(const TrainOptions& o) {
  try {
    o.hp.validate();
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  if (o.tasks < 1) throw UsageError("tasks must be positive");
  if (o.replay && o.buffer < 1) throw UsageError("buffer capacity must be positive");
  if (o.backupdate && !o.replay) throw UsageError("--backupdate requires --replay");
  require_writable_parent(o.model_path);
  if (!o.log_path.empty()) require_writable_parent(o.log_path);

  const Dataset train = load_csv(o.train_csv);
  const TaskStream stream = split_tasks(train, train, o.tasks);
  ModelState model = make_model(train.dim(), stream.classes_per_task(), o.hp);

  std::unique_ptr<std::ofstream> log_file;
  if (!o.log_path.empty()) {
    log_file = std::make_unique<std::ofstream>(o.log_path);
    if (!*log_file) throw Error("cannot write " + o.log_path);
  }
  const EpochCallback on_epoch = [&](const EpochRecord& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "task=%d epoch=%d loss=%.6f train_acc=%.4f seconds=%.3f",
                  r.task + 1, r.epoch, r.loss, r.train_accuracy, r.seconds);
    if (log_file) *log_file << buf << '\n';
  };

  Buffer buffer;
  buffer.capacity = o.buffer;
  for (std::size_t t = 0; t < stream.size(); ++t) {
    const Task& task = stream[t];
    try {
      if (o.replay) {
        train_task_replay(model, task.train, buffer, o.hp, on_epoch);
        buffer = buffer_update(buffer, task.train, static_cast<int>(t), task.first_class,
                               o.hp.seed);
        if (o.backupdate) back_update(model, buffer, o.hp);
      } else {
        train_task(model, task.train, o.hp, on_epoch);
      }
    } catch (const Error& e) {
      throw Error("training task " + std::to_string(t + 1) + ": " + e.what());
    }
    std::cout << "trained task " << t + 1 << "/" << stream.size() << "\n";
  }
  save_model(model, o.model_path);
  std::cout << "model written to " << o.model_path << "\n";
  return kExitOk;
}

int cmd_eval(const EvalOptions& o) {
  std::vector<DetectorConfig> detectors;
  std::vector<ScorerConfig> scorers;
  try {
    for (const auto& d : o.detectors) {
      detectors.push_back(detector_config(d, o.dice_percentile, o.scale_percentile));
    }
    for (const auto& s : o.scorers) scorers.push_back({parse_scorer(s), o.temperature});
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  if (!(o.temperature > 0.0)) throw UsageError("temperature must be positive");
  if (!o.out_path.empty()) require_writable_parent(o.out_path);

  const ModelState model = load_model(o.model_path);
  const TaskStream stream = compatible_stream(model, o.test_csv);
  const EvalReport report = run_sweep(model, stream, detectors, scorers);

  std::ostringstream csv;
  csv << "detector,scorer,lca,aia,af,auc,aupr\n";
  for (const auto& row : report.rows) {
    csv << to_string(row.detector) << ',' << to_string(row.scorer) << ','
        << format_percent(row.lca) << ',' << format_percent(row.aia) << ','
        << format_percent(row.af) << ',' << format_percent(row.auc) << ','
        << format_percent(row.aupr) << '\n';
  }
  if (o.out_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(o.out_path, std::ios::binary);
    out << csv.str();
    if (!out) throw Error("cannot write " + o.out_path);
  }
  return kExitOk;
}

int cmd_curve(const CurveOptions& o) {
  DetectorConfig detector;
  ScorerConfig scorer;
  try {
    detector = detector_config(o.detector, o.dice_percentile, o.scale_percentile);
    scorer = {parse_scorer(o.scorer), o.temperature};
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  if (o.grid <= 0 || 100 % o.grid != 0) throw UsageError("grid step must divide 100");
  if (!o.out_path.empty()) require_writable_parent(o.out_path);

  const ModelState model = load_model(o.model_path);
  const TaskStream stream = compatible_stream(model, o.test_csv);
  std::vector<int> steps = o.steps;
  if (steps.empty()) {
    for (int k = 1; k <= model.trained_tasks(); ++k) steps.push_back(k);
  }
  for (int k : steps) {
    if (k < 1 || k > model.trained_tasks()) {
      throw UsageError("step " + std::to_string(k) + " out of range [1, " +
                       std::to_string(model.trained_tasks()) + "]");
    }
  }

  std::ostringstream csv;
  csv << "step,rejection_rate,accuracy,retained\n";
  char buf[96];
  for (int k : steps) {
    const RejectionInputs in = rejection_inputs(model, stream, k, detector, scorer);
    for (const CurvePoint& p : rejection_curve(in.scores, in.correct, o.grid)) {
      std::snprintf(buf, sizeof buf, "%d,%.2f,%.6f,%d\n", k, p.rejection_rate, p.accuracy,
                    p.retained);
      csv << buf;
    }
  }
  if (o.out_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(o.out_path, std::ios::binary);
    out << csv.str();
    if (!out) throw Error("cannot write " + o.out_path);
  }
  return kExitOk;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Buffer-free open-world class-incremental learning"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value file; flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.config_formatter(std::make_shared<FlatConfig>(&app));
  app.fallthrough();

  SynthOptions synth;
  auto* s = app.add_subcommand("synth", "generate a Gaussian feature dataset");
  s->add_option("--classes", synth.spec.num_classes, "number of classes")->capture_default_str();
  s->add_option("--dim", synth.spec.dim, "feature dimension")->capture_default_str();
  s->add_option("--per-class", synth.spec.per_class, "samples per class")->capture_default_str();
  s->add_option("--sep", synth.spec.mean_separation,
                "class-mean separation in within-class std units")->capture_default_str();
  s->add_option("--seed", synth.spec.seed, "random seed")->capture_default_str();
  s->add_option("--test-fraction", synth.test_fraction, "held-out fraction per class")
      ->capture_default_str();
  s->add_option("-o,--out", synth.out_dir, "output directory")->required();

  TrainOptions train;
  auto* t = app.add_subcommand("train", "train tasks sequentially and write a model file");
  t->add_option("--train", train.train_csv, "training CSV")->required()->check(CLI::ExistingFile);
  t->add_option("--tasks", train.tasks, "number of tasks")->capture_default_str();
  t->add_option("--epochs", train.hp.epochs, "epochs per task")->capture_default_str();
  t->add_option("--lr", train.hp.learning_rate, "SGD learning rate")->capture_default_str();
  t->add_option("--batch", train.hp.batch_size, "batch size")->capture_default_str();
  t->add_option("--hidden", train.hp.hidden_width, "adapter width")->capture_default_str();
  t->add_option("--trunk-dim", train.hp.trunk_dim, "random projection width, 0 = identity")
      ->capture_default_str();
  t->add_option("--seed", train.hp.seed, "random seed")->capture_default_str();
  t->add_option("--slope-max", train.hp.slope_max, "HAT maximum slope")->capture_default_str();
  t->add_option("--ridge", train.hp.covariance_ridge, "relative covariance ridge")
      ->capture_default_str();
  t->add_option("--react-percentile", train.hp.react_percentile,
                "percentile of training activations used as ReAct threshold")
      ->capture_default_str();
  t->add_flag("--replay", train.replay, "replay baseline with an OOD output");
  t->add_option("--buffer", train.buffer, "replay buffer capacity")->capture_default_str();
  t->add_flag("--backupdate", train.backupdate, "back-update earlier heads (replay only)");
  t->add_option("--backupdate-epochs", train.hp.backupdate_epochs, "back-update epochs")
      ->capture_default_str();
  t->add_option("-m,--model", train.model_path, "output model file")->capture_default_str();
  t->add_option("--log", train.log_path, "per-epoch training log");

  EvalOptions eval;
  auto* e = app.add_subcommand("eval", "closed- and open-world metrics per detector/scorer");
  e->add_option("-m,--model", eval.model_path, "model file")->required()->check(CLI::ExistingFile);
  e->add_option("--test", eval.test_csv, "test CSV")->required()->check(CLI::ExistingFile);
  e->add_option("--detectors", eval.detectors, "base,react,dice,scale")
      ->delimiter(',')->capture_default_str();
  e->add_option("--scorers", eval.scorers, "sm,smmd,en,enmd")->delimiter(',')->capture_default_str();
  e->add_option("--dice-percentile", eval.dice_percentile, "DICE sparsity percentile")
      ->capture_default_str();
  e->add_option("--scale-percentile", eval.scale_percentile, "SCALE percentile")
      ->capture_default_str();
  e->add_option("--temperature", eval.temperature, "energy temperature")->capture_default_str();
  e->add_option("-o,--out", eval.out_path, "report CSV (stdout when omitted)");

  CurveOptions curve;
  auto* c = app.add_subcommand("curve", "accuracy-rejection curves per step");
  c->add_option("-m,--model", curve.model_path, "model file")->required()->check(CLI::ExistingFile);
  c->add_option("--test", curve.test_csv, "test CSV")->required()->check(CLI::ExistingFile);
  c->add_option("--steps", curve.steps, "1-based steps, default all")->delimiter(',');
  c->add_option("--detector", curve.detector, "detector")->capture_default_str();
  c->add_option("--scorer", curve.scorer, "scorer")->capture_default_str();
  c->add_option("--dice-percentile", curve.dice_percentile, "DICE sparsity percentile")
      ->capture_default_str();
  c->add_option("--scale-percentile", curve.scale_percentile, "SCALE percentile")
      ->capture_default_str();
  c->add_option("--temperature", curve.temperature, "energy temperature")->capture_default_str();
  c->add_option("--grid", curve.grid, "rejection-rate step in percent")->capture_default_str();
  c->add_option("-o,--out", curve.out_path, "curve CSV (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kExitUsage;
  }

  try {
    if (s->parsed()) return cmd_synth(synth);
    if (t->parsed()) return cmd_train(train);
    if (e->parsed()) return cmd_eval(eval);
    if (c->parsed()) return cmd_curve(curve);
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

int run(const std::vector<std::string>& args) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("openinc");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : storage) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace openinc::cli
