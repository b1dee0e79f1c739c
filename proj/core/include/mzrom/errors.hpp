#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mzrom {

/// Bad input to a library call (bad sizes, out-of-range indices, overflow).
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A linear solve or similar numerical step could not be completed.
class NumericalFailure : public std::runtime_error {
public:
  NumericalFailure(const std::string& what, std::size_t step)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

/// A trajectory produced a non-finite state.
///
/// For the unfiltered coupled PDE-ML system this is an expected outcome, so
/// the blow-up time is carried along for reporting.
class DivergenceError : public std::runtime_error {
public:
  DivergenceError(const std::string& what, double time, std::size_t step)
      : std::runtime_error(what), time_(time), step_(step) {}
  double time() const noexcept { return time_; }
  std::size_t step() const noexcept { return step_; }

private:
  double time_;
  std::size_t step_;
};

class TrainingFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace mzrom
