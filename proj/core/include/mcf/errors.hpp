// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mcf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: dimension mismatch, non-finite values, out-of-range
/// arguments, inconsistent configuration.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A sufficient-statistic average landed on or outside the boundary of the
/// family's mean domain (e.g. an all-zero Bernoulli sample).
class BoundaryError : public Error {
 public:
  using Error::Error;
};

/// Selection weights sum below the weight floor.
class DegenerateSelectionError : public Error {
 public:
  using Error::Error;
};

/// A simulated state became non-finite.
class OverflowError : public Error {
 public:
  OverflowError(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// A Monte-Carlo trial failed; carries the trial index.
class TrialError : public Error {
 public:
  TrialError(const std::string& what, std::size_t trial)
      : Error("trial " + std::to_string(trial) + ": " + what), trial_(trial) {}

  std::size_t trial() const noexcept { return trial_; }

 private:
  std::size_t trial_;
};

}  // namespace mcf
