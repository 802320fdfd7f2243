#pragma once

#include <stdexcept>
#include <string>

namespace capillary {

enum class ErrorKind {
  InvalidArgument,
  InvalidMesh,
  CapOutsideContainer,
  MeshTooCoarse,
  OpenBoundary,
  BoundaryWinding,
  DegenerateVertex,
  Infeasible,
  SingularGram,
  NoConvergence,
  WrongContainer,
  NotOnBoundary,
  IllConditioned,
  DegeneratePoints,
  Io,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` tells callers what went wrong.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace capillary
