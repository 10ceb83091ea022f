#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tshm/coo_tensor.hpp"

namespace tshm {

// Inclusive, 0-based, axis-aligned sub-rectangle of the index space.
struct BoundingBox {
  std::vector<Index> lower;
  std::vector<Index> upper;

  bool contains(std::span<const Index> coord) const noexcept;
  bool operator==(const BoundingBox&) const = default;
};

// Medium-grain grid partition: the cross product of per-mode cuts.
// A cut value c in mode m means a chunk boundary between indices c-1 and c.
// Boxes and counts are in row-major grid order (last mode fastest).
struct PartitionPlan {
  std::vector<Index> dims;
  std::size_t parts = 0;
  std::vector<std::size_t> grid;
  std::vector<std::vector<Index>> cuts;
  std::vector<BoundingBox> boxes;
  std::vector<std::size_t> counts;
  std::size_t capacity = 0;  // max(counts): slots allocated per partition
};

inline constexpr std::size_t kMaxParts = 1024;

// Among the ordered factorizations of `parts` into dims.size() factors with
// grid[m] <= dims[m], picks the one minimizing prod ceil(dims[m]/grid[m]);
// ties go to the lexicographically smallest grid.
std::vector<std::size_t> choose_grid(std::span<const Index> dims, std::size_t parts);

// Splits one mode's marginal histogram into `chunks` non-empty index ranges.
// Each cut is placed greedily so the cumulative count is closest to
// (j+1)*total/chunks; ties pick the leftmost cut.
std::vector<Index> choose_mode_cuts(std::span<const std::size_t> histogram,
                                    std::size_t chunks);
std::vector<std::vector<Index>> choose_cuts(const CooTensor& t,
                                            std::span<const std::size_t> grid);

// Builds boxes from explicit cuts and counts the tensor's elements into them.
PartitionPlan plan_from_cuts(const CooTensor& t, std::vector<std::vector<Index>> cuts);
PartitionPlan build_plan(const CooTensor& t, std::size_t parts);

// parts*capacity / max(1, sum(counts)).
double padding_ratio(const PartitionPlan& plan);

// Row-major grid cell containing coord (binary search per mode).
std::size_t assign(const PartitionPlan& plan, std::span<const Index> coord);

// Stable grouping of element indices by partition: elements of partition k
// occupy [offsets[k], offsets[k+1]) of `order`, in input order.
struct PartitionOrder {
  std::vector<std::size_t> order;
  std::vector<std::size_t> offsets;
};
PartitionOrder partition_order(const PartitionPlan& plan, const CooTensor& t);

}  // namespace tshm
