#include "tshm/partitioner.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "tshm/error.hpp"
#include "tshm/kernels.hpp"

namespace tshm {

namespace {

using u128 = unsigned __int128;
using i128 = __int128;

u128 sat_mul(u128 a, u128 b) {
  if (a != 0 && b > std::numeric_limits<u128>::max() / a)
    return std::numeric_limits<u128>::max();
  return a * b;
}

void enumerate_grids(std::span<const Index> dims, std::size_t mode, std::size_t remaining,
                     std::vector<std::size_t>& current, u128 volume,
                     std::vector<std::size_t>& best, u128& best_volume) {
  if (mode + 1 == dims.size()) {
    if (remaining > dims[mode]) return;
    current[mode] = remaining;
    u128 v = sat_mul(volume, (dims[mode] + remaining - 1) / remaining);
    // Enumeration runs in lexicographic order, so strict < keeps the smallest.
    if (best.empty() || v < best_volume) {
      best = current;
      best_volume = v;
    }
    return;
  }
  for (std::size_t f = 1; f <= remaining; ++f) {
    if (remaining % f != 0) continue;
    if (f > dims[mode]) break;
    current[mode] = f;
    enumerate_grids(dims, mode + 1, remaining / f, current,
                    sat_mul(volume, (dims[mode] + f - 1) / f), best, best_volume);
  }
}

std::vector<BoundingBox> boxes_from_cuts(std::span<const Index> dims,
                                         const std::vector<std::vector<Index>>& cuts,
                                         std::span<const std::size_t> grid,
                                         std::size_t parts) {
  const std::size_t d = dims.size();
  std::vector<BoundingBox> boxes(parts);
  std::vector<std::size_t> cell(d, 0);
  for (std::size_t k = 0; k < parts; ++k) {
    auto& box = boxes[k];
    box.lower.resize(d);
    box.upper.resize(d);
    for (std::size_t m = 0; m < d; ++m) {
      const std::size_t c = cell[m];
      box.lower[m] = c == 0 ? 0 : cuts[m][c - 1];
      box.upper[m] = c == cuts[m].size() ? dims[m] - 1 : cuts[m][c] - 1;
    }
    for (std::size_t m = d; m-- > 0;) {
      if (++cell[m] < grid[m]) break;
      cell[m] = 0;
    }
  }
  return boxes;
}

}  // namespace

bool BoundingBox::contains(std::span<const Index> coord) const noexcept {
  if (coord.size() != lower.size()) return false;
  for (std::size_t m = 0; m < coord.size(); ++m)
    if (coord[m] < lower[m] || coord[m] > upper[m]) return false;
  return true;
}

std::vector<std::size_t> choose_grid(std::span<const Index> dims, std::size_t parts) {
  if (parts < 1) throw Error(Errc::invalid_argument, "partition count must be >= 1");
  if (parts > kMaxParts)
    throw Error(Errc::invalid_argument,
                "partition count " + std::to_string(parts) + " exceeds " +
                    std::to_string(kMaxParts));
  if (dims.empty()) throw Error(Errc::invalid_argument, "dims must be non-empty");
  std::vector<std::size_t> current(dims.size(), 1), best;
  u128 best_volume = 0;
  enumerate_grids(dims, 0, parts, current, 1, best, best_volume);
  if (best.empty())
    throw Error(Errc::invalid_argument,
                "no grid of " + std::to_string(parts) + " cells fits the mode sizes");
  return best;
}

std::vector<Index> choose_mode_cuts(std::span<const std::size_t> histogram,
                                    std::size_t chunks) {
  const std::size_t n = histogram.size();
  if (chunks < 1) throw Error(Errc::invalid_argument, "chunk count must be >= 1");
  if (chunks > n)
    throw Error(Errc::invalid_argument, "cannot split " + std::to_string(n) +
                                            " indices into " + std::to_string(chunks) +
                                            " chunks");
  // prefix[c] = elements with index < c
  std::vector<std::size_t> prefix(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + histogram[i];
  const i128 total = static_cast<i128>(prefix[n]);
  const i128 k = static_cast<i128>(chunks);

  std::vector<Index> cuts;
  cuts.reserve(chunks - 1);
  std::size_t prev = 0;
  for (std::size_t j = 0; j + 1 < chunks; ++j) {
    const i128 target = static_cast<i128>(j + 1) * total;  // scaled by k
    const std::size_t lo = prev + 1;
    const std::size_t hi = n - (chunks - 1 - j);
    std::size_t best = lo;
    i128 best_dist = -1;
    for (std::size_t c = lo; c <= hi; ++c) {
      const i128 scaled = k * static_cast<i128>(prefix[c]);
      const i128 dist = scaled >= target ? scaled - target : target - scaled;
      if (best_dist < 0 || dist < best_dist) {
        best_dist = dist;
        best = c;
      }
      if (scaled >= target) break;
    }
    cuts.push_back(best);
    prev = best;
  }
  return cuts;
}

std::vector<std::vector<Index>> choose_cuts(const CooTensor& t,
                                            std::span<const std::size_t> grid) {
  const std::size_t d = t.order();
  if (grid.size() != d) throw Error(Errc::invalid_argument, "grid arity != tensor order");
  std::vector<std::vector<Index>> cuts(d);
  for (std::size_t m = 0; m < d; ++m) {
    if (grid[m] < 1 || grid[m] > t.dims[m])
      throw Error(Errc::invalid_argument,
                  "grid[" + std::to_string(m) + "]=" + std::to_string(grid[m]) +
                      " exceeds mode size " + std::to_string(t.dims[m]));
    if (grid[m] == 1) continue;
    std::vector<std::size_t> hist(t.dims[m], 0);
    for (std::size_t i = 0; i < t.nnz(); ++i) ++hist[t.coords[i * d + m]];
    cuts[m] = choose_mode_cuts(hist, grid[m]);
  }
  return cuts;
}

PartitionPlan plan_from_cuts(const CooTensor& t, std::vector<std::vector<Index>> cuts) {
  const std::size_t d = t.order();
  if (cuts.size() != d) throw Error(Errc::invalid_argument, "cuts arity != tensor order");
  PartitionPlan plan;
  plan.dims = t.dims;
  plan.grid.resize(d);
  plan.parts = 1;
  for (std::size_t m = 0; m < d; ++m) {
    Index prev = 0;
    for (Index c : cuts[m]) {
      if (c <= prev || c >= t.dims[m])
        throw Error(Errc::invalid_argument,
                    "cuts for mode " + std::to_string(m) +
                        " must be strictly increasing inside (0, dims)");
      prev = c;
    }
    plan.grid[m] = cuts[m].size() + 1;
    plan.parts *= plan.grid[m];
  }
  if (plan.parts > kMaxParts)
    throw Error(Errc::invalid_argument, "too many partitions");
  plan.cuts = std::move(cuts);
  plan.boxes = boxes_from_cuts(plan.dims, plan.cuts, plan.grid, plan.parts);

  std::vector<std::uint32_t> owner(t.nnz());
  kernels::assign_parallel(plan, t, owner);
  plan.counts.assign(plan.parts, 0);
  for (std::uint32_t k : owner) ++plan.counts[k];
  plan.capacity = *std::max_element(plan.counts.begin(), plan.counts.end());
  return plan;
}

PartitionPlan build_plan(const CooTensor& t, std::size_t parts) {
  t.validate();
  auto grid = choose_grid(t.dims, parts);
  return plan_from_cuts(t, choose_cuts(t, grid));
}

double padding_ratio(const PartitionPlan& plan) {
  std::size_t total = 0;
  for (std::size_t c : plan.counts) total += c;
  return static_cast<double>(plan.parts) * static_cast<double>(plan.capacity) /
         static_cast<double>(std::max<std::size_t>(1, total));
}

std::size_t assign(const PartitionPlan& plan, std::span<const Index> coord) {
  if (coord.size() != plan.dims.size())
    throw Error(Errc::out_of_bounds, "coordinate arity mismatch");
  std::size_t cell = 0;
  for (std::size_t m = 0; m < coord.size(); ++m) {
    if (coord[m] >= plan.dims[m])
      throw Error(Errc::out_of_bounds, "coordinate out of bounds");
    const auto& c = plan.cuts[m];
    const auto chunk =
        static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), coord[m]) - c.begin());
    cell = cell * plan.grid[m] + chunk;
  }
  return cell;
}

PartitionOrder partition_order(const PartitionPlan& plan, const CooTensor& t) {
  std::vector<std::uint32_t> owner(t.nnz());
  kernels::assign_parallel(plan, t, owner);
  PartitionOrder po;
  po.offsets.assign(plan.parts + 1, 0);
  for (std::uint32_t k : owner) ++po.offsets[k + 1];
  for (std::size_t k = 0; k < plan.parts; ++k) po.offsets[k + 1] += po.offsets[k];
  po.order.resize(t.nnz());
  std::vector<std::size_t> cursor(po.offsets.begin(), po.offsets.end() - 1);
  for (std::size_t i = 0; i < t.nnz(); ++i) po.order[cursor[owner[i]]++] = i;
  return po;
}

}  // namespace tshm
