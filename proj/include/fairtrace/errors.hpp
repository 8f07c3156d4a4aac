// Copyright 2026 The Fairtrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FAIRTRACE_ERRORS_HPP_
#define FAIRTRACE_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <utility>

namespace fairtrace {

// All recoverable failures carry a stable kebab-case code (e.g.
// "bad-dleq-proof", "stale-state") plus a human-readable detail. The C API
// and the CLI surface the code verbatim.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& detail)
      : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(std::string code, const std::string& detail) {
  throw Error(std::move(code), detail);
}

}  // namespace fairtrace

#endif  // FAIRTRACE_ERRORS_HPP_
