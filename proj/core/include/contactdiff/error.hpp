// Copyright 2026 The contactdiff Authors
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

#ifndef CONTACTDIFF_ERROR_HPP_
#define CONTACTDIFF_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <vector>

namespace contactdiff {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor/layer dimension mismatches.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// On-disk format violations (bad magic, truncation, header mismatch).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Invalid run configuration or usage.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Training divergence (non-finite loss or parameters).
class TrainError : public Error {
 public:
  using Error::Error;
};

// Non-finite guidance gradient; message names the offending energy term.
class GuidanceError : public Error {
 public:
  using Error::Error;
};

// Demonstration collection failure; message names the seed.
class CollectError : public Error {
 public:
  using Error::Error;
};

// guidescript parse failure with source position and expected tokens.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column,
             std::vector<std::string> expected = {})
      : Error(message), line(line), column(column),
        expected(std::move(expected)) {}
  int line;
  int column;
  std::vector<std::string> expected;
};

// guidescript evaluation failure (e.g. division by zero) with node position.
class EvalError : public Error {
 public:
  EvalError(const std::string& message, int line, int column)
      : Error(message), line(line), column(column) {}
  int line;
  int column;
};

// LLM transport failure (connection, HTTP status, malformed response).
class TransportError : public Error {
 public:
  using Error::Error;
};

// Guidance generation ran out of refinement rounds; keeps all diagnostics.
class ExhaustionError : public Error {
 public:
  ExhaustionError(const std::string& message,
                  std::vector<std::string> diagnostics)
      : Error(message), diagnostics(std::move(diagnostics)) {}
  std::vector<std::string> diagnostics;
};

}  // namespace contactdiff

#endif  // CONTACTDIFF_ERROR_HPP_
