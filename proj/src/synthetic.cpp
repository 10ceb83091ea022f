#include "tshm/synthetic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <unordered_set>

#include "tshm/error.hpp"

namespace tshm {

CooTensor gen_synthetic(const SyntheticSpec& spec) {
  if (spec.dims.empty()) throw Error(Errc::invalid_argument, "synthetic dims are empty");
  if (spec.rank < 1) throw Error(Errc::invalid_argument, "synthetic rank must be >= 1");
  if (!(spec.density >= 0.0 && spec.density <= 1.0))
    throw Error(Errc::invalid_argument, "density must lie in [0, 1]");
  std::uint64_t total = 1;
  for (Index n : spec.dims) {
    if (n == 0) throw Error(Errc::invalid_argument, "mode size must be >= 1");
    if (total > std::numeric_limits<std::uint64_t>::max() / n)
      throw Error(Errc::invalid_argument, "synthetic index space exceeds 64 bits");
    total *= n;
  }
  const auto nnz = std::min<std::uint64_t>(
      total, static_cast<std::uint64_t>(std::ceil(spec.density * static_cast<double>(total))));

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t d = spec.dims.size(), rank = spec.rank;

  std::vector<std::vector<double>> factors(d);
  for (std::size_t m = 0; m < d; ++m) {
    factors[m].resize(spec.dims[m] * rank);
    for (double& x : factors[m]) x = uniform(rng);
  }

  std::vector<std::uint64_t> linear;
  linear.reserve(nnz);
  {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(nnz);
    for (std::uint64_t j = total - nnz; j < total; ++j) {
      std::uniform_int_distribution<std::uint64_t> pick(0, j);
      std::uint64_t t = pick(rng);
      if (!seen.insert(t).second) {
        seen.insert(j);
        t = j;
      }
      linear.push_back(t);
    }
  }
  std::sort(linear.begin(), linear.end());

  CooTensor t;
  t.dims = spec.dims;
  t.coords.resize(nnz * d);
  t.values.resize(nnz);
  for (std::size_t e = 0; e < nnz; ++e) {
    std::uint64_t rest = linear[e];
    for (std::size_t m = d; m-- > 0;) {
      t.coords[e * d + m] = rest % spec.dims[m];
      rest /= spec.dims[m];
    }
    double v = 0;
    for (std::size_t r = 0; r < rank; ++r) {
      double p = 1;
      for (std::size_t m = 0; m < d; ++m) p *= factors[m][t.coords[e * d + m] * rank + r];
      v += p;
    }
    t.values[e] = v + (spec.noise != 0.0 ? spec.noise * gauss(rng) : 0.0);
  }
  return t;
}

std::vector<Index> parse_dims(const std::string& text) {
  std::vector<Index> dims;
  std::size_t pos = 0;
  for (;;) {
    auto x = text.find('x', pos);
    std::string_view tok(text.data() + pos, (x == std::string::npos ? text.size() : x) - pos);
    Index v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size() || v == 0)
      throw Error(Errc::parse, "bad dims '" + text + "' (expected e.g. 64x64x64)");
    dims.push_back(v);
    if (x == std::string::npos) break;
    pos = x + 1;
  }
  return dims;
}

}  // namespace tshm
