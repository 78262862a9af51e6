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

#ifndef OPENINC_MODEL_IO_HPP_
#define OPENINC_MODEL_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>

#include "openinc/model.hpp"

namespace openinc {

inline constexpr int kModelFormatVersion = 1;

/// Text model format:
///
///   openinc-model
///   version 1
///   scalar <name> <value>
///   array <name> <rows> <cols>
///   <one line of space-separated values per row>
///   ...
///   end
///
/// Values use the shortest decimal form that round-trips a double exactly, so
/// load followed by save reproduces the file byte for byte.
void write_model(const ModelState& model, std::ostream& out);
ModelState read_model(std::istream& in);

void save_model(const ModelState& model, const std::filesystem::path& path);
ModelState load_model(const std::filesystem::path& path);

/// Serialised form, handy for bitwise comparisons.
std::string model_to_string(const ModelState& model);

}  // namespace openinc

#endif  // OPENINC_MODEL_IO_HPP_
