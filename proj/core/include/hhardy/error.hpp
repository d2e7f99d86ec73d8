#pragma once

#include <stdexcept>
#include <string>

namespace hh {

enum class ErrorKind {
  configuration,
  domain,
  singularity,
  resolution,
  unsupported,
  degenerate,
  accuracy,
  convergence,
  parameter,
  io,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

}  // namespace hh
