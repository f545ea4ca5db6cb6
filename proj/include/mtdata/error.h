#pragma once

#include <stdexcept>
#include <string>

namespace mtdata {

// Bad or inconsistent input data: malformed files, unknown language codes,
// invariant violations detected while reading.  Maps to CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid invocation or configuration.  Maps to CLI exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Remote judge endpoint failures that cannot be recovered by retrying.
// Maps to CLI exit code 3.
class RemoteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AuthError : public RemoteError {
 public:
  using RemoteError::RemoteError;
};

}  // namespace mtdata
