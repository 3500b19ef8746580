// Copyright 2026 The siqrng Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace siqrng {

/// Failure categories. The CLI maps each to a distinct exit code.
enum class ErrorKind {
    invalid_argument,
    insufficient_test_data,
    no_extractable_rounds,
    infeasible_attack,
    unsupported,
    inconsistent_analysis,
    schema,
    io,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument:
            return "invalid-argument";
        case ErrorKind::insufficient_test_data:
            return "insufficient-test-data";
        case ErrorKind::no_extractable_rounds:
            return "no-extractable-rounds";
        case ErrorKind::infeasible_attack:
            return "infeasible-attack";
        case ErrorKind::unsupported:
            return "unsupported";
        case ErrorKind::inconsistent_analysis:
            return "inconsistent-analysis";
        case ErrorKind::schema:
            return "schema";
        case ErrorKind::io:
            return "io";
    }
    return "unknown";
}

class Error : public std::runtime_error {
   public:
    Error(ErrorKind kind, const std::string &message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

   private:
    ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string &message) {
    if (!condition) {
        throw Error(kind, message);
    }
}

}  // namespace siqrng
