#pragma once

#include <span>
#include <vector>

#include "tshm/coo_tensor.hpp"
#include "tshm/partitioner.hpp"

namespace tshm {

// Non-owning view of one partition's live elements. In a consumer session the
// spans alias the producer's shared-memory regions directly.
struct PartitionView {
  BoundingBox box;
  std::size_t count = 0;
  std::span<const Index> coords;  // count * order, element-major
  std::span<double> values;       // count
};

std::size_t total_count(std::span<const PartitionView> views) noexcept;

// Returns the index of the first element (within the view) whose coordinate
// lies outside the box or outside dims, or count when all are valid.
std::size_t first_invalid_element(const PartitionView& view, std::span<const Index> dims);

// Heap-backed partitions laid out exactly as a producer would publish them
// (same plan, same stable element order). Used for the in-process baseline so
// both paths feed identical element streams to the same kernels.
class InMemoryPartitions {
 public:
  InMemoryPartitions(const CooTensor& t, const PartitionPlan& plan);

  InMemoryPartitions(const InMemoryPartitions&) = delete;
  InMemoryPartitions& operator=(const InMemoryPartitions&) = delete;
  InMemoryPartitions(InMemoryPartitions&&) = default;
  InMemoryPartitions& operator=(InMemoryPartitions&&) = default;

  std::span<const PartitionView> views() const noexcept { return views_; }
  const std::vector<Index>& dims() const noexcept { return dims_; }

 private:
  std::vector<Index> dims_;
  std::vector<std::vector<Index>> coords_;
  std::vector<std::vector<double>> values_;
  std::vector<PartitionView> views_;
};

// Concatenates views back into a tensor (partition order, then slot order).
CooTensor gather(std::span<const PartitionView> views, std::span<const Index> dims);

}  // namespace tshm
