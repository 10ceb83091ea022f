#pragma once

#include <stdexcept>
#include <string>

namespace tshm {

enum class Errc {
  invalid_argument,
  parse,
  io,
  already_exists,
  not_found,
  system,
  protocol,
  timeout,
  peer_error,
  corrupt,
  layout_mismatch,
  out_of_bounds,
  shape_mismatch,
};

const char* to_string(Errc code) noexcept;

// Base exception for everything thrown by the library. The code lets callers
// branch on the failure class without string matching.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace tshm
