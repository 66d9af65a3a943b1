#pragma once

#include <stdexcept>
#include <string>

namespace eddm {

/// Base class for every recoverable failure raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (OBJ, JSON, binary cache).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Mesh with no vertices or no faces.
class EmptyMeshError : public Error {
 public:
  using Error::Error;
};

/// Contract violation on otherwise well-formed data (size mismatch, bad range, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Scale-compensating child under a parent with a zero local scale component.
class ZeroScaleError : public Error {
 public:
  using Error::Error;
};

/// Bind world transform is not invertible.
class SingularBindError : public Error {
 public:
  using Error::Error;
};

/// Deformer input references a joint with no transform supplied.
class MissingJointError : public Error {
 public:
  using Error::Error;
};

/// Pruning removed every influence of some vertex.
class EmptyInfluenceError : public Error {
 public:
  using Error::Error;
};

/// No usable tangent direction at a vertex (all one-ring edges parallel to the normal).
class DegenerateFrameError : public Error {
 public:
  using Error::Error;
};

}  // namespace eddm
