#pragma once

#include <stdexcept>
#include <string>

namespace mlim {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A measure violates its invariants (negative weight, overlapping regions...).
class MalformedMeasure : public Error {
 public:
  using Error::Error;
};

/// A function representation is not well formed.
class MalformedFunction : public Error {
 public:
  using Error::Error;
};

/// Objects combined in one operation live on different intervals.
class DomainMismatch : public Error {
 public:
  using Error::Error;
};

/// Both the positive and negative part of an integral diverge.
class UndefinedIntegral : public Error {
 public:
  using Error::Error;
};

/// (+inf) + (-inf) or a similar indeterminate form.
class UndefinedArithmetic : public Error {
 public:
  using Error::Error;
};

/// A requested computation has no closed form with the given representation.
class NoClosedForm : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An epigraphical schedule asks for indices beyond the available range.
class ScheduleExhausted : public Error {
 public:
  using Error::Error;
};

/// An input that must be integrable carries infinite values on positive mass.
class NonIntegrable : public Error {
 public:
  using Error::Error;
};

/// A check was invoked on a scenario outside its stated hypotheses.
class PreconditionFailed : public Error {
 public:
  using Error::Error;
};

/// Scenario document failed validation. `path` points at the offending field.
class ScenarioError : public Error {
 public:
  ScenarioError(std::string path, const std::string& message)
      : Error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace mlim
