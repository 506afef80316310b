#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A catalog or operation parameter violates its documented constraint.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Cholesky factorisation of a metric matrix failed; carries the point.
class SingularMetricError : public Error {
 public:
  SingularMetricError(const std::string& what, std::vector<double> point)
      : Error(what), point_(std::move(point)) {}
  const std::vector<double>& point() const { return point_; }

 private:
  std::vector<double> point_;
};

// A field lacks the derivative order or structure an operation needs.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Time outside the window where the self-similar scale c(t) stays positive.
class WindowError : public Error {
 public:
  using Error::Error;
};

// Flow state left the admissible set (A, B > 0, map inside target chart).
class InvariantBreach : public Error {
 public:
  using Error::Error;
};

}  // namespace rlab
