// Copyright 2026 The xsng Authors
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

namespace xsng {

/// Root of every exception the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not fit the operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A caller broke a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (layer sizes, kernel parity, band edges, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf or divergence detected.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Embedding or table index out of range.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input; message carries line and field.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input whose values violate a domain rule.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Syllable missing from the lexicon of its language.
class OovError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Corrupt or incompatible binary file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened.
class FileError : public Error {
 public:
  explicit FileError(const std::string& path)
      : Error("cannot open file: " + path), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace xsng
