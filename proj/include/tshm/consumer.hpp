#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tshm/handshake.hpp"
#include "tshm/kruskal.hpp"
#include "tshm/metadata.hpp"
#include "tshm/partition_view.hpp"
#include "tshm/shm_region.hpp"

namespace tshm {

// Consumer side of a session: every partition attached zero-copy and wrapped
// as a PartitionView. A default-constructed session is unattached.
class ConsumerSession {
 public:
  ConsumerSession() = default;
  ConsumerSession(ConsumerSession&&) noexcept = default;
  ConsumerSession& operator=(ConsumerSession&&) noexcept = default;

  bool attached() const noexcept { return attached_; }
  bool finished() const noexcept { return finished_; }
  const SessionMetadata& metadata() const noexcept { return meta_; }
  std::span<const Index> dims() const noexcept { return meta_.dims; }
  std::span<const PartitionView> views() const noexcept { return views_; }
  FlagCell& flag() noexcept { return flag_; }

  // Moves the flag to ERROR with `code` (from READY). Used when the
  // workload fails after a successful attach.
  void fail(std::uint32_t code);

 private:
  friend ConsumerSession attach_session(const std::filesystem::path&,
                                        std::chrono::nanoseconds);
  friend void finish(ConsumerSession&, const KruskalModel&);

  SessionMetadata meta_;
  FlagCell flag_;
  std::vector<ShmRegion> regions_;
  std::vector<PartitionView> views_;
  bool attached_ = false;
  bool finished_ = false;
};

// Waits (up to `timeout`, shared between the metadata file appearing and the
// READY flag) then attaches and validates every partition: widths, endianness
// and region lengths must match this build (else ERROR 3, region missing is
// ERROR 2), and every live coordinate must lie in its box and dims (else
// ERROR 1 naming the partition). Validation failures are signaled to the
// producer and thrown.
ConsumerSession attach_session(const std::filesystem::path& metadata_path,
                               std::chrono::nanoseconds timeout);

// Writes the model into /tshm-<session>-result and signals DONE.
// Region creation failure signals ERROR 2.
void finish(ConsumerSession& session, const KruskalModel& model);

// Order-independent fingerprints of a session's live elements, shared with
// independent consumers so they can cross-check what they read:
//   valsum    = sum of values in partition then slot order
//   coordhash = wrapping sum over elements of FNV-1a-64 of the element's
//               `order` coordinates as little-endian u64 bytes
struct SessionChecksums {
  std::size_t nnz = 0;
  double valsum = 0.0;
  std::uint64_t coordhash = 0;
};
SessionChecksums session_checksums(std::span<const PartitionView> views, std::size_t order);
std::uint64_t coordinate_hash(std::span<const Index> coord) noexcept;

}  // namespace tshm
