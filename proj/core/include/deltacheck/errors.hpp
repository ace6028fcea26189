// Copyright 2026 The Deltacheck Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DELTACHECK_ERRORS_HPP_
#define DELTACHECK_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace deltacheck {

// Root of every error thrown by the library. `kind()` is a stable short name
// used in run reports and CLI messages.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
  virtual const char* kind() const noexcept { return "Error"; }
};

#define DELTACHECK_DECLARE_ERROR(Name, Base)                          \
  class Name : public Base {                                          \
   public:                                                            \
    explicit Name(const std::string& message) : Base(message) {}      \
    const char* kind() const noexcept override { return #Name; }      \
  }

DELTACHECK_DECLARE_ERROR(ParseError, Error);
DELTACHECK_DECLARE_ERROR(ValidationError, Error);
DELTACHECK_DECLARE_ERROR(VersionGapError, ValidationError);
DELTACHECK_DECLARE_ERROR(PreconditionError, Error);
DELTACHECK_DECLARE_ERROR(IoError, Error);

DELTACHECK_DECLARE_ERROR(CacheMissError, Error);
DELTACHECK_DECLARE_ERROR(ProviderError, Error);
DELTACHECK_DECLARE_ERROR(AuthError, Error);
DELTACHECK_DECLARE_ERROR(AmbiguousReplyError, Error);

DELTACHECK_DECLARE_ERROR(GenerationParseError, Error);
DELTACHECK_DECLARE_ERROR(EmptyCandidateSetError, Error);
DELTACHECK_DECLARE_ERROR(InvalidSpecError, ValidationError);

DELTACHECK_DECLARE_ERROR(UnknownAssertionError, Error);
DELTACHECK_DECLARE_ERROR(DimensionMismatchError, ValidationError);
DELTACHECK_DECLARE_ERROR(TooLargeError, Error);

#undef DELTACHECK_DECLARE_ERROR

}  // namespace deltacheck

#endif  // DELTACHECK_ERRORS_HPP_
