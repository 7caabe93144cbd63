// Copyright 2026 The Revelight Authors. All Rights Reserved.
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

namespace revelight {

// Every error thrown by the library derives from Error so callers (the CLI in
// particular) can report a single machine-greppable line.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "error"; }
};

#define REVELIGHT_DEFINE_ERROR(Name, tag)                       \
  class Name : public Error {                                  \
   public:                                                     \
    explicit Name(const std::string& what) : Error(what) {}    \
    const char* kind() const noexcept override { return tag; } \
  }

REVELIGHT_DEFINE_ERROR(ShapeError, "shape");
REVELIGHT_DEFINE_ERROR(DomainError, "domain");
REVELIGHT_DEFINE_ERROR(NumericError, "numeric");
REVELIGHT_DEFINE_ERROR(ProtocolError, "protocol");
REVELIGHT_DEFINE_ERROR(DecodeError, "decode");
REVELIGHT_DEFINE_ERROR(ConfigError, "config");
REVELIGHT_DEFINE_ERROR(UsageError, "usage");
REVELIGHT_DEFINE_ERROR(UnsupportedError, "unsupported");
REVELIGHT_DEFINE_ERROR(ParseError, "parse");
REVELIGHT_DEFINE_ERROR(FormatError, "format");

#undef REVELIGHT_DEFINE_ERROR

}  // namespace revelight
