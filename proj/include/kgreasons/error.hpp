/*
 * Copyright 2026 The kgreasons Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
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

namespace kgr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Precondition violation: unregistered ids, empty inputs, bad bounds.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A label that is not registered in the graph.
class NotFoundError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Requested reasoning scheme exists in theory but has no implementation (S2).
class UnsupportedSchemeError : public Error {
 public:
  using Error::Error;
};

/// Support statistics over zero explained slots.
class UndefinedSupportError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Conflicting write to the choice log (duplicate or out-of-order phase).
class ConflictError : public Error {
 public:
  using Error::Error;
};

}  // namespace kgr
