/*
 * Copyright 2026 The bgan-hash Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
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

namespace bgan {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable file; the message names the path and, where it
/// applies, the byte offset of the offending field.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Operand shapes that an operation cannot combine.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A value violates a precondition (invalid config, missing label, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Non-finite value produced inside a checked computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace bgan
