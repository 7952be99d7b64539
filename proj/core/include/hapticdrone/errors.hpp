#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hapticdrone {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numeric value is non-finite or outside its declared range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Text or a number list could not be parsed into a domain value.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Caller-supplied input violates a precondition.
class InputError : public Error {
 public:
  using Error::Error;
};

/// The two distal circles of a five-bar linkage do not intersect.
class SingularConfigurationError : public Error {
 public:
  using Error::Error;
};

/// IK target lies outside the reachable workspace.
class WorkspaceError : public Error {
 public:
  WorkspaceError(const std::string& what, double distance)
      : Error(what), distance_to_workspace_(distance) {}
  double distance_to_workspace() const noexcept { return distance_to_workspace_; }

 private:
  double distance_to_workspace_;
};

/// IK branch requires servo angles outside the configured limits.
class LimitError : public Error {
 public:
  using Error::Error;
};

/// A scene or configuration failed validation. Carries every violation found.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// An instruction selector matched no object in the scene.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Malformed message on the policy wire protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Transport-level failure (timeout, refused connection).
class TransportError : public Error {
 public:
  using Error::Error;
};

/// A file on disk does not match its expected format.
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace hapticdrone
