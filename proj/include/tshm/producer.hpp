#pragma once

#include <chrono>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tshm/coo_tensor.hpp"
#include "tshm/handshake.hpp"
#include "tshm/kruskal.hpp"
#include "tshm/metadata.hpp"
#include "tshm/partitioner.hpp"
#include "tshm/shm_region.hpp"

namespace tshm {

// Producer side of a session. publish() creates one coords and one values
// region per partition (capacity slots each, count slots filled in input
// order, padding zeroed), writes the metadata file and signals READY.
//
// The session owns its regions: destruction tears everything down unless
// keep() was called.
class ProducerSession {
 public:
  static ProducerSession publish(const CooTensor& t, const PartitionPlan& plan,
                                 std::string session,
                                 std::filesystem::path metadata_path);

  ProducerSession(ProducerSession&& other) noexcept;
  ProducerSession& operator=(ProducerSession&&) = delete;
  ~ProducerSession();

  const SessionMetadata& metadata() const noexcept { return meta_; }
  const std::filesystem::path& metadata_path() const noexcept { return metadata_path_; }

  // Direct views of this process's own mappings of partition k.
  std::span<const Index> coords(std::size_t k) const;
  std::span<double> values(std::size_t k);

  FlagCell& flag() noexcept { return flag_; }

  // Blocks until the consumer signals DONE, then reads its result region.
  // ERROR surfaces as PeerError; the session stays valid after a timeout.
  KruskalModel await_done(std::chrono::nanoseconds timeout);

  // Unlinks every session region (including the result region) and removes
  // the metadata file. Idempotent.
  void teardown() noexcept;
  // Leave regions and metadata in place when this object is destroyed.
  void keep() noexcept { keep_ = true; }

 private:
  ProducerSession() = default;

  SessionMetadata meta_;
  std::filesystem::path metadata_path_;
  FlagCell flag_;
  std::vector<ShmRegion> coords_;
  std::vector<ShmRegion> values_;
  std::vector<std::string> created_;  // names this session is responsible for
  bool wrote_metadata_ = false;
  bool torn_down_ = false;
  bool keep_ = false;
};

}  // namespace tshm
