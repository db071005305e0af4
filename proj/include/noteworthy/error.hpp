/*
 * Copyright 2026 The Noteworthy Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace noteworthy {

// Base of every error raised by the library. `exit_code` follows the CLI
// convention: 1 usage, 2 data/validation, 3 internal.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, int exit_code = 2)
      : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

// Malformed input record. `line` is 1-based; 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class LexiconError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class TrainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what, 1) {}
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace noteworthy
