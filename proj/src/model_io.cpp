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

#include "openinc/model_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>
#include <vector>

#include "openinc/error.hpp"

namespace openinc {

namespace {

constexpr std::string_view kMagic = "openinc-model";

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void scalar(const std::string& name, double v) {
    out_ << "scalar " << name << ' ' << format_double(v) << '\n';
  }

  void array(const std::string& name, const Eigen::MatrixXd& m) {
    out_ << "array " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (j > 0) out_ << ' ';
        out_ << format_double(m(i, j));
      }
      out_ << '\n';
    }
  }

  void vector(const std::string& name, const Eigen::VectorXd& v) {
    array(name, Eigen::MatrixXd(v.transpose()));
  }

 private:
  std::ostream& out_;
};

// Every entry of the file, keyed by name.
class Entries {
 public:
  explicit Entries(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto next = [&]() -> bool {
      if (!std::getline(in, line)) return false;
      ++line_no;
      return true;
    };
    if (!next() || line != kMagic) throw FormatError("not an openinc model file");
    if (!next()) throw FormatError("truncated model file: missing version");
    {
      std::istringstream ls(line);
      std::string key;
      int version = 0;
      if (!(ls >> key >> version) || key != "version") {
        throw FormatError("malformed version line");
      }
      if (version != kModelFormatVersion) {
        throw FormatError("model format version " + std::to_string(version) +
                          " is not supported (expected " +
                          std::to_string(kModelFormatVersion) + ")");
      }
    }
    bool ended = false;
    while (next()) {
      std::istringstream ls(line);
      std::string kind;
      std::string name;
      ls >> kind;
      if (kind == "end") {
        ended = true;
        break;
      }
      if (!(ls >> name)) throw FormatError("malformed entry at line " + std::to_string(line_no));
      if (kind == "scalar") {
        std::string value;
        ls >> value;
        scalars_[name] = parse(value, line_no);
      } else if (kind == "array") {
        Eigen::Index rows = -1;
        Eigen::Index cols = -1;
        if (!(ls >> rows >> cols) || rows < 0 || cols < 0) {
          throw FormatError("malformed array header at line " + std::to_string(line_no));
        }
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
          if (!next()) throw FormatError("truncated model file inside array '" + name + "'");
          std::istringstream row(line);
          for (Eigen::Index j = 0; j < cols; ++j) {
            std::string value;
            if (!(row >> value)) {
              throw FormatError("truncated row in array '" + name + "' at line " +
                                std::to_string(line_no));
            }
            m(i, j) = parse(value, line_no);
          }
        }
        arrays_[name] = std::move(m);
      } else {
        throw FormatError("unknown entry kind '" + kind + "' at line " + std::to_string(line_no));
      }
    }
    if (!ended) throw FormatError("truncated model file: missing end marker");
  }

  double scalar(const std::string& name) const {
    const auto it = scalars_.find(name);
    if (it == scalars_.end()) throw FormatError("model file lacks scalar '" + name + "'");
    return it->second;
  }

  int integer(const std::string& name) const { return static_cast<int>(scalar(name)); }

  const Eigen::MatrixXd& array(const std::string& name) const {
    const auto it = arrays_.find(name);
    if (it == arrays_.end()) throw FormatError("model file lacks array '" + name + "'");
    return it->second;
  }

  Eigen::VectorXd vector(const std::string& name) const {
    const auto& m = array(name);
    if (m.rows() != 1) throw FormatError("array '" + name + "' is not a row vector");
    return m.row(0).transpose();
  }

 private:
  static double parse(const std::string& s, std::size_t line_no) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      throw FormatError("bad number '" + s + "' at line " + std::to_string(line_no));
    }
    return v;
  }

  std::map<std::string, double> scalars_;
  std::map<std::string, Eigen::MatrixXd> arrays_;
};

std::string task_key(std::size_t t, std::string_view field) {
  return "task." + std::to_string(t) + "." + std::string(field);
}

}  // namespace

void write_model(const ModelState& model, std::ostream& out) {
  model.check_consistent();
  out << kMagic << '\n' << "version " << kModelFormatVersion << '\n';
  Writer w(out);
  w.scalar("classes_per_task", model.classes_per_task);
  w.scalar("trained_tasks", model.trained_tasks());
  w.scalar("trunk.input_dim", model.trunk.input_dim);
  w.scalar("trunk.identity", model.trunk.identity ? 1 : 0);
  if (!model.trunk.identity) w.array("trunk.projection", model.trunk.projection);
  w.scalar("adapter.slope_max", model.adapters.slope_max);
  w.array("adapter.weight", model.adapters.weight);
  w.vector("adapter.bias", model.adapters.bias);
  for (std::size_t t = 0; t < model.heads.size(); ++t) {
    const TaskHead& head = model.heads[t];
    const TrainStats& st = model.stats[t];
    w.vector(task_key(t, "embedding"), model.adapters.embeddings[t]);
    w.scalar(task_key(t, "head.ood_logit"), head.ood_logit ? 1 : 0);
    w.array(task_key(t, "head.weight"), head.weight);
    w.vector(task_key(t, "head.bias"), head.bias);
    w.scalar(task_key(t, "stats.num_classes"), static_cast<double>(st.class_means.size()));
    for (std::size_t c = 0; c < st.class_means.size(); ++c) {
      w.vector(task_key(t, "stats.class_mean." + std::to_string(c)), st.class_means[c]);
    }
    w.array(task_key(t, "stats.covariance"), st.covariance);
    w.array(task_key(t, "stats.precision"), st.precision);
    w.vector(task_key(t, "stats.mean_activations"), st.mean_activations);
    w.scalar(task_key(t, "stats.react_threshold"), st.react_threshold);
    w.scalar(task_key(t, "stats.react_percentile"), st.react_percentile);
    w.scalar(task_key(t, "stats.ridge"), st.ridge);
  }
  out << "end\n";
}

ModelState read_model(std::istream& in) {
  const Entries e(in);
  ModelState model;
  model.classes_per_task = e.integer("classes_per_task");
  const int trained = e.integer("trained_tasks");
  model.trunk.input_dim = e.integer("trunk.input_dim");
  model.trunk.identity = e.integer("trunk.identity") != 0;
  if (!model.trunk.identity) model.trunk.projection = e.array("trunk.projection");
  model.adapters.slope_max = e.scalar("adapter.slope_max");
  model.adapters.weight = e.array("adapter.weight");
  model.adapters.bias = e.vector("adapter.bias");
  for (std::size_t t = 0; t < static_cast<std::size_t>(trained); ++t) {
    model.adapters.embeddings.push_back(e.vector(task_key(t, "embedding")));
    TaskHead head;
    head.ood_logit = e.integer(task_key(t, "head.ood_logit")) != 0;
    head.weight = e.array(task_key(t, "head.weight"));
    head.bias = e.vector(task_key(t, "head.bias"));
    model.heads.push_back(std::move(head));

    TrainStats st;
    const int classes = e.integer(task_key(t, "stats.num_classes"));
    for (int c = 0; c < classes; ++c) {
      st.class_means.push_back(e.vector(task_key(t, "stats.class_mean." + std::to_string(c))));
    }
    st.covariance = e.array(task_key(t, "stats.covariance"));
    st.precision = e.array(task_key(t, "stats.precision"));
    st.mean_activations = e.vector(task_key(t, "stats.mean_activations"));
    st.react_threshold = e.scalar(task_key(t, "stats.react_threshold"));
    st.react_percentile = e.scalar(task_key(t, "stats.react_percentile"));
    st.ridge = e.scalar(task_key(t, "stats.ridge"));
    model.stats.push_back(std::move(st));
  }
  model.check_consistent();
  return model;
}

void save_model(const ModelState& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  write_model(model, out);
  if (!out) throw FormatError("write failed for " + path.string());
}

ModelState load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_model(in);
}

std::string model_to_string(const ModelState& model) {
  std::ostringstream out;
  write_model(model, out);
  return out.str();
}

}  // namespace openinc
