// Copyright 2026 The unsupseg Authors.
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

#ifndef UNSUPSEG_ERRORS_HPP_
#define UNSUPSEG_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace unsupseg {

// Caller broke a documented precondition (shape mismatch, index out of range).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input sequence shorter than the receptive field of an operation.
class InputTooShortError : public ContractError {
 public:
  InputTooShortError(const std::string& what, std::size_t required)
      : ContractError(what), required_(required) {}
  std::size_t required() const noexcept { return required_; }

 private:
  std::size_t required_;
};

// Malformed or unsupported data on disk: WAV, annotation, manifest, checkpoint.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values in a loss or gradient.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace unsupseg

#endif  // UNSUPSEG_ERRORS_HPP_
