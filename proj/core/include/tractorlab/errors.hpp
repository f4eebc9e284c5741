#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tractorlab {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A point lies outside a chart domain, or a curve leaves it.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Requested jet order or model parameter beyond what is supported.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

// Incompatible tensor shapes or valences.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Contraction of two indices of the same variance.
class VarianceError : public Error {
 public:
  using Error::Error;
};

// Degenerate basis / rank drop.
class RankError : public Error {
 public:
  using Error::Error;
};

// Singular metric; carries the offending point.
class DegeneracyError : public Error {
 public:
  DegeneracyError(const std::string& what, std::vector<double> point)
      : Error(what), point_(std::move(point)) {}
  const std::vector<double>& point() const { return point_; }

 private:
  std::vector<double> point_;
};

class ZeroScaleError : public Error {
 public:
  using Error::Error;
};

class ScaleMismatchError : public Error {
 public:
  using Error::Error;
};

// An operation precondition (Einstein, Sasaki, ...) failed numerically.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Candidate scale is not (i,j,k)-adapted; carries the divergence values.
class NotAdaptedError : public PreconditionError {
 public:
  NotAdaptedError(const std::string& what, std::vector<double> divergences)
      : PreconditionError(what), divergences_(std::move(divergences)) {}
  const std::vector<double>& divergences() const { return divergences_; }

 private:
  std::vector<double> divergences_;
};

// Fibre consistency violated when pushing data to a leaf space.
class DescentError : public Error {
 public:
  using Error::Error;
};

// A catalogued model failed its own self-check.
class ModelError : public Error {
 public:
  using Error::Error;
};

}  // namespace tractorlab
