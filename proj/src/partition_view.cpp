#include "tshm/partition_view.hpp"

#include "tshm/error.hpp"

namespace tshm {

std::size_t total_count(std::span<const PartitionView> views) noexcept {
  std::size_t n = 0;
  for (const auto& v : views) n += v.count;
  return n;
}

std::size_t first_invalid_element(const PartitionView& view, std::span<const Index> dims) {
  const std::size_t d = dims.size();
  for (std::size_t e = 0; e < view.count; ++e) {
    auto c = view.coords.subspan(e * d, d);
    for (std::size_t m = 0; m < d; ++m)
      if (c[m] >= dims[m]) return e;
    if (!view.box.contains(c)) return e;
  }
  return view.count;
}

InMemoryPartitions::InMemoryPartitions(const CooTensor& t, const PartitionPlan& plan)
    : dims_(t.dims) {
  if (plan.dims != t.dims)
    throw Error(Errc::shape_mismatch, "plan was built for different dims");
  const std::size_t d = t.order();
  const auto po = partition_order(plan, t);
  coords_.resize(plan.parts);
  values_.resize(plan.parts);
  views_.resize(plan.parts);
  for (std::size_t k = 0; k < plan.parts; ++k) {
    const std::size_t begin = po.offsets[k], end = po.offsets[k + 1];
    auto& c = coords_[k];
    auto& v = values_[k];
    c.reserve((end - begin) * d);
    v.reserve(end - begin);
    for (std::size_t j = begin; j < end; ++j) {
      auto src = t.coord(po.order[j]);
      c.insert(c.end(), src.begin(), src.end());
      v.push_back(t.values[po.order[j]]);
    }
    views_[k] = PartitionView{plan.boxes[k], end - begin, c, v};
  }
}

CooTensor gather(std::span<const PartitionView> views, std::span<const Index> dims) {
  CooTensor t;
  t.dims.assign(dims.begin(), dims.end());
  const std::size_t d = dims.size();
  for (const auto& v : views) {
    t.coords.insert(t.coords.end(), v.coords.begin(), v.coords.begin() + v.count * d);
    t.values.insert(t.values.end(), v.values.begin(), v.values.begin() + v.count);
  }
  return t;
}

}  // namespace tshm
