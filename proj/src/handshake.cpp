#include "tshm/handshake.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace tshm {

namespace {
constexpr std::size_t kMagicWord = 0;
constexpr std::size_t kStatusWord = 1;
constexpr std::size_t kErrorWord = 2;
}  // namespace

const char* to_string(FlagStatus s) noexcept {
  switch (s) {
    case FlagStatus::init: return "INIT";
    case FlagStatus::ready: return "READY";
    case FlagStatus::done: return "DONE";
    case FlagStatus::error: return "ERROR";
  }
  return "?";
}

bool is_legal_transition(FlagStatus from, FlagStatus to) noexcept {
  switch (from) {
    case FlagStatus::init:
      return to == FlagStatus::ready || to == FlagStatus::error;
    case FlagStatus::ready:
      return to == FlagStatus::done || to == FlagStatus::error;
    default:
      return false;
  }
}

FlagCell FlagCell::create(std::string region_name) {
  FlagCell cell(ShmRegion::create(std::move(region_name), kFlagCellBytes));
  std::atomic_ref<std::uint32_t>(*cell.word(kStatusWord))
      .store(static_cast<std::uint32_t>(FlagStatus::init), std::memory_order_relaxed);
  std::atomic_ref<std::uint32_t>(*cell.word(kMagicWord))
      .store(kFlagMagic, std::memory_order_release);
  return cell;
}

FlagCell FlagCell::attach(std::string region_name) {
  FlagCell cell(ShmRegion::attach(std::move(region_name)));
  if (cell.region_.size() < kFlagCellBytes)
    throw Error(Errc::corrupt, "flag region '" + cell.region_.name() +
                                   "' is shorter than a flag cell");
  cell.check_magic();
  return cell;
}

std::uint32_t* FlagCell::word(std::size_t index) const {
  if (!region_.attached()) throw Error(Errc::protocol, "flag cell not attached");
  return const_cast<std::uint32_t*>(
      reinterpret_cast<const std::uint32_t*>(region_.data())) + index;
}

void FlagCell::check_magic() const {
  std::uint32_t m =
      std::atomic_ref<std::uint32_t>(*word(kMagicWord)).load(std::memory_order_acquire);
  if (m != kFlagMagic)
    throw Error(Errc::corrupt, "flag magic mismatch in '" + region_.name() + "'");
}

FlagStatus FlagCell::status() const {
  check_magic();
  std::uint32_t raw =
      std::atomic_ref<std::uint32_t>(*word(kStatusWord)).load(std::memory_order_acquire);
  if (raw > static_cast<std::uint32_t>(FlagStatus::error))
    throw Error(Errc::corrupt, "flag status " + std::to_string(raw) + " is invalid");
  return static_cast<FlagStatus>(raw);
}

std::uint32_t FlagCell::error_code() const {
  status();  // acquire
  return std::atomic_ref<std::uint32_t>(*word(kErrorWord)).load(std::memory_order_relaxed);
}

void FlagCell::signal(FlagStatus next, std::uint32_t error_code) {
  FlagStatus current = status();
  if (!is_legal_transition(current, next))
    throw Error(Errc::protocol, std::string("illegal flag transition ") +
                                    to_string(current) + " -> " + to_string(next));
  if (next == FlagStatus::error)
    std::atomic_ref<std::uint32_t>(*word(kErrorWord))
        .store(error_code, std::memory_order_relaxed);
  auto expected = static_cast<std::uint32_t>(current);
  if (!std::atomic_ref<std::uint32_t>(*word(kStatusWord))
           .compare_exchange_strong(expected, static_cast<std::uint32_t>(next),
                                    std::memory_order_acq_rel,
                                    std::memory_order_acquire))
    throw Error(Errc::protocol,
                std::string("flag changed concurrently from ") + to_string(current) +
                    " to " + to_string(static_cast<FlagStatus>(expected)));
}

void FlagCell::await(FlagStatus wanted, std::chrono::nanoseconds timeout) const {
  if (wanted == FlagStatus::init)
    throw Error(Errc::invalid_argument, "cannot await INIT");
  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + timeout;
  std::chrono::microseconds backoff{1};
  constexpr std::chrono::microseconds max_backoff{1000};
  for (;;) {
    FlagStatus s = status();
    if (s == FlagStatus::error) {
      if (wanted == FlagStatus::error) return;
      std::uint32_t code = error_code();
      throw PeerError(code, "peer signaled ERROR with code " + std::to_string(code));
    }
    if (wanted == FlagStatus::error && s == FlagStatus::done)
      throw Error(Errc::protocol, "flag reached DONE while awaiting ERROR");
    if (static_cast<std::uint32_t>(s) >= static_cast<std::uint32_t>(wanted)) return;
    if (clock::now() >= deadline)
      throw TimeoutError(s, std::string("timed out waiting for ") + to_string(wanted) +
                                "; last status " + to_string(s));
    std::this_thread::sleep_for(backoff);
    backoff = std::min(backoff * 2, max_backoff);
  }
}

}  // namespace tshm
