#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cpmol {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// geometry

/// The query point is (numerically) equidistant to two separate surface
/// points, i.e. it sits on the medial axis. Raised during band
/// construction this means dx is too coarse for the geometry.
class AmbiguousClosestPoint : public Error {
 public:
  using Error::Error;
};

class Unsupported : public Error {
 public:
  using Error::Error;
};

class MeshFormatError : public Error {
 public:
  using Error::Error;
};

class EmptyMesh : public MeshFormatError {
 public:
  using MeshFormatError::MeshFormatError;
};

class DegenerateTriangle : public MeshFormatError {
 public:
  using MeshFormatError::MeshFormatError;
};

class NotWatertight : public MeshFormatError {
 public:
  using MeshFormatError::MeshFormatError;
};

// band / operators

class BandNotClosed : public Error {
 public:
  using Error::Error;
};

class OutOfBand : public Error {
 public:
  using Error::Error;
};

class MissingNeighbour : public Error {
 public:
  using Error::Error;
};

class NonpositiveDiffusivity : public Error {
 public:
  using Error::Error;
};

// solvers

class SingularSystem : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

/// NaN or Inf appeared in a time-stepping run; reported as instability.
class NonFinite : public Error {
 public:
  NonFinite(const std::string& what, std::size_t step, double time)
      : Error(what), step_(step), time_(time) {}

  std::size_t step() const noexcept { return step_; }
  double time() const noexcept { return time_; }

 private:
  std::size_t step_;
  double time_;
};

}  // namespace cpmol
