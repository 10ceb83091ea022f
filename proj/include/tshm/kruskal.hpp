#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tshm/coo_tensor.hpp"

namespace tshm {

// Dense row-major matrix used for CP factors and MTTKRP outputs.
struct FactorMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  FactorMatrix() = default;
  FactorMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) noexcept { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data[i * cols + j]; }
  std::span<double> row(std::size_t i) noexcept { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data.data() + i * cols, cols};
  }

  bool operator==(const FactorMatrix&) const = default;
};

// Rank-R CP model: X ~ sum_r weights[r] * factors[0](:,r) o ... o factors[d-1](:,r).
struct KruskalModel {
  std::vector<Index> dims;
  std::size_t rank = 0;
  std::vector<double> weights;
  std::vector<FactorMatrix> factors;

  std::size_t order() const noexcept { return dims.size(); }
  // Shapes consistent with dims and rank.
  void validate() const;

  bool operator==(const KruskalModel&) const = default;
};

// True when every double in both models has the same bit pattern.
bool bitwise_equal(const KruskalModel& a, const KruskalModel& b);

// Result region layout (little-endian, 8-byte aligned):
//   u32 magic "TSMR", u32 version, u64 rank, u64 order, u64 dims[order],
//   f64 weights[rank], f64 factor[m][dims[m]][rank] for m = 0..order-1.
inline constexpr std::uint32_t kResultMagic = 0x54534D52;  // "TSMR"
inline constexpr std::uint32_t kResultVersion = 1;

std::size_t result_bytes(std::span<const Index> dims, std::size_t rank);
void write_result(std::span<std::byte> out, const KruskalModel& model);
// Throws Error(corrupt) on a bad header or a buffer too short for it.
KruskalModel read_result(std::span<const std::byte> in);

}  // namespace tshm
