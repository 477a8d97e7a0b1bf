// Copyright 2026 The weakval Authors
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

/**
 * @file
 * Exception types shared by every module.
 *
 * Two families exist: `InvalidArgument` for malformed inputs (bad shapes,
 * non-Hermitian matrices, unparsable files) and `PreconditionError` for
 * numerical preconditions that a well-formed input can still violate
 * (vanishing normalisation, Nyquist violations, packets that have not left
 * the scattering region). The CLI maps the first to exit code 2 and the
 * second to exit code 3.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace weakval {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
  public:
    using Error::Error;
};

class PreconditionError : public Error {
  public:
    using Error::Error;
};

/// Normalisation integral too small for a ratio of moments to be meaningful.
class DegenerateNormalization : public PreconditionError {
  public:
    DegenerateNormalization(const std::string &what, double magnitude)
        : PreconditionError(what + " (|norm| = " + std::to_string(magnitude) +
                            ")"),
          magnitude_(magnitude) {}

    [[nodiscard]] double magnitude() const noexcept { return magnitude_; }

  private:
    double magnitude_;
};

namespace detail {

inline void require(bool condition, const std::string &message) {
    if (!condition) {
        throw InvalidArgument(message);
    }
}

inline void require_numeric(bool condition, const std::string &message) {
    if (!condition) {
        throw PreconditionError(message);
    }
}

} // namespace detail
} // namespace weakval
