/* Copyright 2026 The htnmr Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <stdexcept>
#include <string>

namespace htnmr {

// Bad inputs: malformed documents, dimension mismatches, precondition
// violations. The CLI maps these to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// System size above the configured spin cap.
class CapacityError : public ValidationError {
 public:
  explicit CapacityError(const std::string& what) : ValidationError(what) {}
};

// A numerical contract broke at runtime (non-Hermitian Hamiltonian where one
// was required, imaginary residue above tolerance, degenerate fits). The CLI
// maps these to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace htnmr
