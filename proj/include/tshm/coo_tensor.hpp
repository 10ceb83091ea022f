#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace tshm {

using Index = std::uint64_t;

// Sparse tensor in coordinate format. Coordinates are 0-based and stored
// element-major: the `order()` indices of element i live at
// coords[i*order(), (i+1)*order()).
struct CooTensor {
  std::vector<Index> dims;
  std::vector<Index> coords;
  std::vector<double> values;

  std::size_t order() const noexcept { return dims.size(); }
  std::size_t nnz() const noexcept { return values.size(); }

  std::span<const Index> coord(std::size_t element) const noexcept {
    return {coords.data() + element * order(), order()};
  }

  // Throws Error(invalid_argument / out_of_bounds) if any invariant fails.
  void validate() const;

  bool operator==(const CooTensor&) const = default;
};

// FROSTT .tns text: one element per line, 1-based coordinates then the value.
// Lines starting with '#' and blank lines are skipped. The order is taken from
// the first data line, or from `dims_override` when given; without an override
// the dims are the per-mode maximum coordinate.
CooTensor parse_tns(std::istream& in,
                    std::optional<std::vector<Index>> dims_override = {});
CooTensor read_tns_file(const std::filesystem::path& path,
                        std::optional<std::vector<Index>> dims_override = {});

// Writes values in shortest round-trip form, so parse_tns(emit_tns(t)) == t.
void emit_tns(const CooTensor& t, std::ostream& out);
void write_tns_file(const CooTensor& t, const std::filesystem::path& path);

// O(nnz) scan; first match wins, 0.0 when absent.
double dense_lookup(const CooTensor& t, std::span<const Index> coord);

}  // namespace tshm
