#pragma once

#include <stdexcept>
#include <string>

namespace vifusion {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A precondition on an operation's inputs was violated.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// A fuse or enqueue would exceed the configured buffer capacity.
class CapacityExceededError : public Error {
 public:
  using Error::Error;
};

/// A segment is larger than the whole fusion buffer and can never be admitted.
class OversizeSegmentError : public Error {
 public:
  using Error::Error;
};

/// An offset table or payload does not describe the buffer it points into.
class CorruptionError : public Error {
 public:
  using Error::Error;
};

/// A topology file or runtime configuration is inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// No path exists between two endpoints.
class UnreachableError : public Error {
 public:
  using Error::Error;
};

/// A byte stream did not contain a well-formed frame.
class FramingError : public Error {
 public:
  using Error::Error;
};

/// A well-formed frame violated the collective protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// A blocking receive or job expired.
class TimeoutError : public Error {
 public:
  using Error::Error;
};

/// An AllReduce aborted because participants never showed up.
class StragglerTimeoutError : public Error {
 public:
  using Error::Error;
};

/// A ring step failed because a peer disconnected.
class AbortedRingError : public Error {
 public:
  using Error::Error;
};

/// Every simulated actor is blocked and no event can ever wake one.
class DeadlockError : public Error {
 public:
  using Error::Error;
};

/// Report or data files could not be written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace vifusion
