#pragma once

#include <chrono>
#include <cstdint>
#include <string>

#include "tshm/error.hpp"
#include "tshm/shm_region.hpp"

namespace tshm {

enum class FlagStatus : std::uint32_t { init = 0, ready = 1, done = 2, error = 3 };

const char* to_string(FlagStatus s) noexcept;

inline constexpr std::uint32_t kFlagMagic = 0x54534D31;  // "TSM1"
inline constexpr std::size_t kFlagCellBytes = 64;

// Byte layout of the cell at offset 0 of the flag region. Little-endian.
struct FlagCellLayout {
  std::uint32_t magic;
  std::uint32_t status;
  std::uint32_t error_code;
  std::uint32_t reserved[13];
};
static_assert(sizeof(FlagCellLayout) == kFlagCellBytes);

// error_code values carried with FlagStatus::error.
namespace peer_code {
inline constexpr std::uint32_t metadata_invalid = 1;
inline constexpr std::uint32_t region_missing = 2;
inline constexpr std::uint32_t layout_mismatch = 3;
inline constexpr std::uint32_t compute_failure = 4;
}  // namespace peer_code

// Legal edges: init->ready, ready->done, ready->error, init->error.
bool is_legal_transition(FlagStatus from, FlagStatus to) noexcept;

class TimeoutError : public Error {
 public:
  TimeoutError(FlagStatus last, const std::string& what)
      : Error(Errc::timeout, what), last_status_(last) {}
  FlagStatus last_status() const noexcept { return last_status_; }

 private:
  FlagStatus last_status_;
};

// The peer moved the flag to ERROR; peer_code() is the code it posted.
class PeerError : public Error {
 public:
  PeerError(std::uint32_t code, const std::string& what)
      : Error(Errc::peer_error, what), peer_code_(code) {}
  std::uint32_t peer_code() const noexcept { return peer_code_; }

 private:
  std::uint32_t peer_code_;
};

// Session status cell living in shared memory. Status stores use release
// ordering and loads use acquire ordering, so any data written before a
// signal() is visible to a peer that observes the new status.
class FlagCell {
 public:
  static FlagCell create(std::string region_name);
  static FlagCell attach(std::string region_name);

  FlagCell() = default;

  FlagStatus status() const;
  std::uint32_t error_code() const;

  // Throws Error(protocol) on an illegal transition.
  void signal(FlagStatus next, std::uint32_t error_code = 0);

  // Polls with exponential backoff (1 us up to 1 ms) until the status reaches
  // `wanted`. ERROR satisfies any wait; unless ERROR was requested it is
  // reported as PeerError.
  void await(FlagStatus wanted, std::chrono::nanoseconds timeout) const;

  ShmRegion& region() noexcept { return region_; }
  const ShmRegion& region() const noexcept { return region_; }

 private:
  explicit FlagCell(ShmRegion region) : region_(std::move(region)) {}

  std::uint32_t* word(std::size_t index) const;
  void check_magic() const;

  ShmRegion region_;
};

}  // namespace tshm
