#pragma once

#include <stdexcept>
#include <string>

namespace cdcache {

enum class ErrorCode {
  domain,      // argument outside the mathematical domain
  stability,   // offered load reaches the server count
  numerical,   // root finding or inversion failed its accuracy contract
  config,      // invalid scenario configuration
  io,          // file system or parse failure
  degenerate,  // request is meaningless for the given parameters
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cdcache
