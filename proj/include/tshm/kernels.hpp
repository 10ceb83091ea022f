#pragma once

#include <cstdint>
#include <span>

#include "tshm/coo_tensor.hpp"
#include "tshm/kruskal.hpp"
#include "tshm/partition_view.hpp"
#include "tshm/partitioner.hpp"

// Data-parallel kernels. Each has a serial reference used by the tests and
// the benchmark; the OpenMP versions must agree with it (exactly for
// assignment, to 1e-12 relative for MTTKRP, and bitwise with one thread).
namespace tshm::kernels {

// out[i] = partition of element i.
void assign_serial(const PartitionPlan& plan, const CooTensor& t,
                   std::span<std::uint32_t> out);
void assign_parallel(const PartitionPlan& plan, const CooTensor& t,
                     std::span<std::uint32_t> out);

// Matricized tensor times Khatri-Rao product for `mode`:
//   out(i_mode, r) = sum over elements of v * prod_{q != mode} factors[q](i_q, r)
FactorMatrix mttkrp_serial(std::span<const PartitionView> views,
                           std::span<const FactorMatrix> factors, std::size_t mode);
// Work is split into fixed-size element blocks; each thread accumulates into a
// private matrix and the partial results are summed in thread order.
FactorMatrix mttkrp_parallel(std::span<const PartitionView> views,
                             std::span<const FactorMatrix> factors, std::size_t mode);

// Throws Error(shape_mismatch) if factors do not fit the views.
void check_mttkrp_shapes(std::span<const PartitionView> views,
                         std::span<const FactorMatrix> factors, std::size_t mode);

}  // namespace tshm::kernels
