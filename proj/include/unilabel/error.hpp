// Copyright 2026 The Unilabel Authors.
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

#ifndef UNILABEL_ERROR_HPP
#define UNILABEL_ERROR_HPP

#include <stdexcept>
#include <string>

namespace unilabel {

enum class ErrorKind {
  kParse,      // malformed text input (taxonomy, directive, manifest, JSON)
  kReference,  // unknown dataset / class / record
  kConflict,   // contradictory directives or inputs
  kCollision,  // two classes end up with the same normalized name
  kRange,      // a value outside the permitted domain (ids, fractions, ...)
  kFormat,     // image has the wrong layout (channels, bit depth, size)
  kIo,         // file system failure
  kArgument,   // invalid argument to an API call
};

const char* to_string(ErrorKind kind);

// Single exception type thrown by the library. The C API maps `kind` onto
// ul_status codes; the CLI maps every Error onto exit code 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Parse failures carry the 1-based line number in both the message and a field.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorKind::kParse, "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace unilabel

#endif  // UNILABEL_ERROR_HPP
