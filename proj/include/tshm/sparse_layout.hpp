#pragma once

#include <span>
#include <string>
#include <vector>

#include "tshm/coo_tensor.hpp"
#include "tshm/shm_region.hpp"

namespace tshm {

// Single-process sparse domain whose coordinates and values live in growable
// shared-memory regions (/tshm-<session>-layout-coords and -vals). Indices
// must be added before values can be stored at them; reads of in-bounds
// indices that were never added return 0.0. Lookups go through an in-process
// hash index from coordinate tuple to slot.
//
// Both regions grow by doubling (floor 4 slots) via ftruncate + remap, so
// spans returned by coords()/values() are invalidated by add_index() and
// shrink_to_fit(). The regions are unlinked when the domain is destroyed.
class SparseDomain {
 public:
  static constexpr std::size_t kMinCapacity = 4;

  SparseDomain(std::string session, std::vector<Index> dims);
  ~SparseDomain();
  SparseDomain(SparseDomain&&) noexcept;
  SparseDomain& operator=(SparseDomain&&) = delete;
  SparseDomain(const SparseDomain&) = delete;
  SparseDomain& operator=(const SparseDomain&) = delete;

  // Adds every element of `t` and stores its value; for duplicate
  // coordinates the last value wins.
  static SparseDomain from_tensor(const CooTensor& t, std::string session);

  std::size_t order() const noexcept { return dims_.size(); }
  const std::vector<Index>& dims() const noexcept { return dims_; }
  std::size_t count() const noexcept { return count_; }
  std::size_t capacity() const noexcept { return capacity_; }

  // Returns the slot for coord, appending it (value 0.0) if new.
  std::size_t add_index(std::span<const Index> coord);
  bool contains(std::span<const Index> coord) const;
  // Slot of coord or npos.
  std::size_t find(std::span<const Index> coord) const;

  // Throws Error(not_found) if coord was never added.
  void set(std::span<const Index> coord, double value);
  double get(std::span<const Index> coord) const;

  // Snapshot of the live prefix in slot order.
  CooTensor freeze() const;
  // capacity <- max(count, kMinCapacity), truncating both regions.
  void shrink_to_fit();

  std::span<const Index> coords() const { return coords_.view<Index>(0, count_ * order()); }
  std::span<const double> values() const { return values_.view<double>(0, count_); }
  const ShmRegion& coords_region() const noexcept { return coords_; }
  const ShmRegion& values_region() const noexcept { return values_; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  void check_bounds(std::span<const Index> coord) const;
  std::uint64_t hash(std::span<const Index> coord) const noexcept;
  bool slot_matches(std::size_t slot, std::span<const Index> coord) const noexcept;
  void resize_storage(std::size_t new_capacity);
  void rebuild_index(std::size_t table_size);

  std::string session_;
  std::vector<Index> dims_;
  std::size_t count_ = 0;
  std::size_t capacity_ = 0;
  ShmRegion coords_;
  ShmRegion values_;
  // Open addressing with linear probing; entries are slots or npos.
  std::vector<std::size_t> table_;
};

}  // namespace tshm
