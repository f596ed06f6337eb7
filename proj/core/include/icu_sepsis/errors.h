// Copyright 2026 The ICU-Sepsis Engine Authors.
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

#ifndef ICU_SEPSIS_ERRORS_H_
#define ICU_SEPSIS_ERRORS_H_

#include <stdexcept>
#include <string>

namespace icu_sepsis {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed model or data: dimension mismatches, broken invariants,
// inconsistent counts, ambiguous terminal detection.
class DataError : public Error {
 public:
  using Error::Error;
};

// Filesystem and parse failures.
class IoError : public Error {
 public:
  using Error::Error;
};

// Iterative solver ran out of iterations.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Linear system for exact evaluation is singular or ill-conditioned,
// typically because the policy never terminates from some state.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

// API misuse: stepping a finished episode, out-of-range ids, bad config.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace icu_sepsis

#endif  // ICU_SEPSIS_ERRORS_H_
