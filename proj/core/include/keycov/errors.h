// Copyright 2026 The keycov Authors.
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

#ifndef KEYCOV_ERRORS_H_
#define KEYCOV_ERRORS_H_

#include <stdexcept>
#include <string>

namespace keycov {

// Base class for every error raised by the library. The CLI maps IoError to
// exit code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (JSON line, UTF-8, config syntax).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a data invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Inconsistent or out-of-range configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An inventory mutation would break alias/canonical disjointness.
class ConflictError : public Error {
 public:
  using Error::Error;
};

// Operation not allowed in the current state (e.g. deciding twice).
class StateError : public Error {
 public:
  using Error::Error;
};

// Lookup of an unknown entity (canonical key, proposal, version).
class NotFoundError : public Error {
 public:
  using Error::Error;
};

// File system or process failure.
class IoError : public Error {
 public:
  using Error::Error;
};

// A logit backend failed or returned a malformed response.
class BackendError : public Error {
 public:
  using Error::Error;
};

}  // namespace keycov

#endif  // KEYCOV_ERRORS_H_
