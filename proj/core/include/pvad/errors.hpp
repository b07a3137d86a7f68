/*
 * Copyright 2026 The PVAD Authors.
 *
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

#include <stdexcept>
#include <string>

namespace pvad {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration values (bad feature params, bad training setup).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Tensor/vector dimension mismatch.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// API misuse: missing conditioning inputs, untrainable architecture, etc.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent data (files, labels, metric preconditions).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Filesystem and I/O failures.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pvad
