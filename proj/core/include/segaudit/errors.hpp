#pragma once

#include <stdexcept>
#include <string>

namespace segaudit {

// Base of every error raised by the toolkit. Subclasses map onto CLI exit
// codes (see ExitCodeFor in tools/).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed container: bad magic, unsupported dtype, multi-channel PNG...
class FormatError : public Error {
 public:
  using Error::Error;
};

// Dimension or class-count disagreement between two objects.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Values outside their domain (probability rows, class indices, params).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ClassNotPresentError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A Shift perturbation that left the mask unchanged; callers re-sample.
class DegenerateShiftError : public Error {
 public:
  using Error::Error;
};

class InfeasiblePlanError : public Error {
 public:
  using Error::Error;
};

class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

// Report and error log disagree on image ids.
class JoinError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace segaudit
