#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace stagemg {

using cdouble = std::complex<double>;

/** Failure category carried by every exception thrown from this library. */
enum class ErrorCode {
  InvalidArgument = 1,
  DimensionMismatch = 2,
  SingularMatrix = 3,
  NoConvergence = 4,
  Io = 5,
  Internal = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

inline void require(bool cond, ErrorCode code, const std::string& msg) {
  if (!cond) fail(code, msg);
}

}  // namespace stagemg
