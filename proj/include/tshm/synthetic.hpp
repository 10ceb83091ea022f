#pragma once

#include <cstdint>
#include <vector>

#include "tshm/coo_tensor.hpp"

namespace tshm {

struct SyntheticSpec {
  std::vector<Index> dims;
  std::size_t rank = 3;
  double density = 0.01;
  double noise = 0.0;
  std::uint64_t seed = 1;
};

// Ground-truth factors uniform(0,1); ceil(density * prod(dims)) distinct
// coordinates sampled uniformly (Floyd's algorithm) and stored in
// lexicographic order; each value is the rank-`rank` reconstruction plus
// noise * N(0,1). Deterministic for a given spec.
CooTensor gen_synthetic(const SyntheticSpec& spec);

// Parses "64x64x64".
std::vector<Index> parse_dims(const std::string& text);

}  // namespace tshm
