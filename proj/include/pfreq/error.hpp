#pragma once

#include <stdexcept>
#include <string>

namespace pfreq {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid construction parameters (non-positive lengths, bad counts).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Malformed mesh or configuration text.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Mesh rejected by a topological or metric validity check.
class MeshError : public Error {
 public:
  using Error::Error;
};

/// Input outside an operation's mathematical domain (f <= 0 under a log, t <= 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Spectral truncation too coarse for the requested time, or kernel negativity.
class TruncationError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

/// Ricci-flow step rejected (stability limit, curvature loss, extinction).
class FlowError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace pfreq
