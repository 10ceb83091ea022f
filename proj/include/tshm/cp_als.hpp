#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tshm/kruskal.hpp"
#include "tshm/partition_view.hpp"

namespace tshm {

struct CpAlsOptions {
  std::size_t rank = 16;
  std::size_t iterations = 5;
  std::uint64_t seed = 1;
  // Relative eigenvalue cutoff for the Gram pseudo-inverse.
  double pinv_tolerance = 1e-12;
  // Use the serial MTTKRP reference instead of the OpenMP kernel.
  bool serial = false;
};

struct CpAlsResult {
  KruskalModel model;
  double fit = 0.0;
  std::vector<double> fit_history;  // one entry per iteration
  // Set when a Gram matrix was numerically rank deficient; the update still
  // proceeds through the pseudo-inverse.
  bool rank_deficient = false;
};

// Alternating least squares. Factors start uniform(0,1) from `seed`; after
// each mode update the columns are normalized into the weights. The fit
// 1 - ||X - M|| / ||X|| is computed from sparse identities, no densification;
// ||X||^2 is the sum of squared stored values, exact for distinct coordinates.
CpAlsResult cp_als(std::span<const PartitionView> views, std::span<const Index> dims,
                   const CpAlsOptions& options);

// Elementwise (Hadamard) product of the Gram matrices A_q^T A_q, q != skip.
// Pass skip >= order to include every mode.
FactorMatrix gram_hadamard(std::span<const FactorMatrix> factors, std::size_t skip);

}  // namespace tshm
