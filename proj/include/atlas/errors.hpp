#pragma once

#include <stdexcept>

namespace atlas {

// Error taxonomy mirrors the CLI exit codes: config 1, dependency 2, data 3, remote 4.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct DependencyError : Error {
  using Error::Error;
};

struct DataError : Error {
  using Error::Error;
};

struct RemoteError : Error {
  using Error::Error;
};

// Contract violations on in-process calls (zero-norm cosine, medoid of an
// empty cluster). Distinct from DataError so callers can tell a bad input
// file from a bad call site.
struct DomainError : Error {
  using Error::Error;
};

}  // namespace atlas
