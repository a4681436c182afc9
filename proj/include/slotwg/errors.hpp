// Copyright (c) slotwg contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace slotwg {

// Bad input: config files, material records, out-of-range wavelengths,
// geometry that violates its invariants. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure at run time: eigensolver non-convergence, inadequate
// padding, mode-tracking ambiguity. Maps to CLI exit code 3.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace slotwg
