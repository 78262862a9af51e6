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

#ifndef OPENINC_CLI_HPP_
#define OPENINC_CLI_HPP_

#include <string>
#include <vector>

namespace openinc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Entry point of the `openinc` tool: synth | train | eval | curve.
int run(int argc, char** argv);

/// Same, with argv[0] omitted.
int run(const std::vector<std::string>& args);

}  // namespace openinc::cli

#endif  // OPENINC_CLI_HPP_
