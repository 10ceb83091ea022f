#include "tshm/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <string>

#include "tshm/error.hpp"

namespace tshm::kernels {

namespace {

constexpr std::size_t kBlockElements = 4096;

struct Block {
  std::size_t view;
  std::size_t begin;
  std::size_t end;
};

std::vector<Block> make_blocks(std::span<const PartitionView> views) {
  std::vector<Block> blocks;
  for (std::size_t v = 0; v < views.size(); ++v)
    for (std::size_t b = 0; b < views[v].count; b += kBlockElements)
      blocks.push_back({v, b, std::min(views[v].count, b + kBlockElements)});
  return blocks;
}

// Accumulates elements [begin, end) of one view into `out`.
inline void accumulate(const PartitionView& view, std::size_t begin, std::size_t end,
                       std::span<const FactorMatrix> factors, std::size_t mode,
                       FactorMatrix& out, std::span<double> scratch) {
  const std::size_t d = factors.size();
  const std::size_t rank = out.cols;
  for (std::size_t e = begin; e < end; ++e) {
    const Index* c = view.coords.data() + e * d;
    const double v = view.values[e];
    std::fill(scratch.begin(), scratch.end(), v);
    for (std::size_t q = 0; q < d; ++q) {
      if (q == mode) continue;
      const double* row = factors[q].data.data() + c[q] * rank;
      for (std::size_t r = 0; r < rank; ++r) scratch[r] *= row[r];
    }
    double* dst = out.data.data() + c[mode] * rank;
    for (std::size_t r = 0; r < rank; ++r) dst[r] += scratch[r];
  }
}

}  // namespace

void assign_serial(const PartitionPlan& plan, const CooTensor& t,
                   std::span<std::uint32_t> out) {
  if (out.size() != t.nnz()) throw Error(Errc::shape_mismatch, "assign output size");
  for (std::size_t i = 0; i < t.nnz(); ++i)
    out[i] = static_cast<std::uint32_t>(assign(plan, t.coord(i)));
}

void assign_parallel(const PartitionPlan& plan, const CooTensor& t,
                     std::span<std::uint32_t> out) {
  if (out.size() != t.nnz()) throw Error(Errc::shape_mismatch, "assign output size");
  const auto n = static_cast<std::ptrdiff_t>(t.nnz());
  // assign() only throws for out-of-range coordinates; validate first so no
  // exception escapes the parallel region.
  for (std::size_t i = 0; i < t.coords.size(); ++i)
    if (t.coords[i] >= plan.dims[i % plan.dims.size()])
      throw Error(Errc::out_of_bounds, "element coordinate outside the plan");
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out[i] = static_cast<std::uint32_t>(assign(plan, t.coord(static_cast<std::size_t>(i))));
}

void check_mttkrp_shapes(std::span<const PartitionView> views,
                         std::span<const FactorMatrix> factors, std::size_t mode) {
  const std::size_t d = factors.size();
  if (d == 0 || mode >= d) throw Error(Errc::shape_mismatch, "mode out of range");
  const std::size_t rank = factors[0].cols;
  for (const auto& f : factors)
    if (f.cols != rank || f.data.size() != f.rows * f.cols)
      throw Error(Errc::shape_mismatch, "factor matrices disagree on rank");
  for (const auto& v : views) {
    if (v.coords.size() < v.count * d || v.values.size() < v.count)
      throw Error(Errc::shape_mismatch, "partition view shorter than its count");
    if (v.box.lower.size() != d)
      throw Error(Errc::shape_mismatch, "partition order != factor count");
    for (std::size_t m = 0; m < d; ++m)
      if (v.count > 0 && v.box.upper[m] >= factors[m].rows)
        throw Error(Errc::shape_mismatch,
                    "factor " + std::to_string(m) + " has too few rows for the tensor");
  }
}

FactorMatrix mttkrp_serial(std::span<const PartitionView> views,
                           std::span<const FactorMatrix> factors, std::size_t mode) {
  check_mttkrp_shapes(views, factors, mode);
  FactorMatrix out(factors[mode].rows, factors[mode].cols);
  std::vector<double> scratch(out.cols);
  for (const auto& v : views) accumulate(v, 0, v.count, factors, mode, out, scratch);
  return out;
}

FactorMatrix mttkrp_parallel(std::span<const PartitionView> views,
                             std::span<const FactorMatrix> factors, std::size_t mode) {
  check_mttkrp_shapes(views, factors, mode);
  const auto blocks = make_blocks(views);
  const std::size_t rows = factors[mode].rows, rank = factors[mode].cols;
  std::vector<FactorMatrix> partial(static_cast<std::size_t>(omp_get_max_threads()));

#pragma omp parallel
  {
    const auto tid = static_cast<std::size_t>(omp_get_thread_num());
    FactorMatrix acc(rows, rank);
    std::vector<double> scratch(rank);
#pragma omp for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks.size()); ++b) {
      const Block& blk = blocks[static_cast<std::size_t>(b)];
      accumulate(views[blk.view], blk.begin, blk.end, factors, mode, acc, scratch);
    }
    partial[tid] = std::move(acc);
  }

  FactorMatrix out(rows, rank);
  for (const auto& p : partial) {
    if (p.data.empty()) continue;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += p.data[i];
  }
  return out;
}

}  // namespace tshm::kernels
