// Copyright 2026 The FSMR Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace fsmr {

// Numeric values double as CLI exit codes and C API status codes.
enum class Status : int {
  kOk = 0,
  kConfig = 1,
  kData = 2,
  kNumeric = 3,
  kInternal = 4,
};

class Error : public std::runtime_error {
 public:
  Error(Status status, const std::string& what)
      : std::runtime_error(what), status_(status) {}
  Status status() const noexcept { return status_; }

 private:
  Status status_;
};

/// Invalid configuration, unknown config key, or bad CLI usage.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(Status::kConfig, what) {}
};

/// Malformed or inconsistent input data (datasets, checkpoints).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(Status::kData, what) {}
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class UnsupportedVersionError : public DataError {
 public:
  using DataError::DataError;
};

class CorruptionError : public DataError {
 public:
  using DataError::DataError;
};

class CapacityError : public DataError {
 public:
  using DataError::DataError;
};

/// Violated numeric contract: non-finite values, probabilities outside
/// (0, 1), non-scalar loss, or mismatched tensor shapes.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(Status::kNumeric, what) {}
};

class ShapeError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace fsmr
