// Copyright 2026 The divclust Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace divclust {

enum class ErrorCode {
  kConfig,          // invalid hyper-parameters or flags
  kData,            // unreadable / malformed / non-finite input
  kShape,           // dimension mismatch
  kZeroVariance,    // node cannot be projected; caller treats it as unsplittable
  kRank,            // whitening rank below requested components
  kConvergence,     // iterative solver hit max_iter
  kDegenerateSplit, // a cut leaves one side empty or lies outside the score range
  kStructural,      // unknown node, non-leaf target, corrupt tree
  kCapacity,        // refused for memory reasons (kernel Gram guard)
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Power iteration ran out of iterations; the last iterate is still usable.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, std::vector<double> last_iterate,
                   double last_magnitude)
      : Error(ErrorCode::kConvergence, message),
        last_iterate_(std::move(last_iterate)),
        last_magnitude_(last_magnitude) {}

  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
  double last_magnitude() const noexcept { return last_magnitude_; }

 private:
  std::vector<double> last_iterate_;
  double last_magnitude_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace divclust
