#include "tshm/error.hpp"

namespace tshm {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::parse: return "parse error";
    case Errc::io: return "i/o error";
    case Errc::already_exists: return "already exists";
    case Errc::not_found: return "not found";
    case Errc::system: return "system error";
    case Errc::protocol: return "protocol error";
    case Errc::timeout: return "timeout";
    case Errc::peer_error: return "peer error";
    case Errc::corrupt: return "corrupt data";
    case Errc::layout_mismatch: return "layout mismatch";
    case Errc::out_of_bounds: return "out of bounds";
    case Errc::shape_mismatch: return "shape mismatch";
  }
  return "unknown";
}

}  // namespace tshm
