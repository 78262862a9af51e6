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

#ifndef OPENINC_ERROR_HPP_
#define OPENINC_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace openinc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (CSV, dataset invariants, splits).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Violated precondition on a caller-supplied argument.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Failure during optimisation or statistics fitting.
class TrainingError : public Error {
 public:
  using Error::Error;
};

/// Unreadable, truncated or incompatible model file.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace openinc

#endif  // OPENINC_ERROR_HPP_
