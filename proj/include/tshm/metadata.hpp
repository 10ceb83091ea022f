#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tshm/partitioner.hpp"

namespace tshm {

// Region names for a session token:
//   /tshm-<session>-flag, /tshm-<session>-result,
//   /tshm-<session>-p<k>-coords, /tshm-<session>-p<k>-vals,
//   /tshm-<session>-layout-coords, /tshm-<session>-layout-vals
void validate_session_token(std::string_view session);
std::string flag_region_name(std::string_view session);
std::string result_region_name(std::string_view session);
std::string coords_region_name(std::string_view session, std::size_t partition);
std::string values_region_name(std::string_view session, std::size_t partition);
std::string layout_region_name(std::string_view session, std::string_view role);

struct PartitionEntry {
  std::string coords_region;
  std::string values_region;
  BoundingBox box;
  std::size_t count = 0;
  std::size_t capacity = 0;

  bool operator==(const PartitionEntry&) const = default;
};

// The handoff descriptor: a line-oriented `key=value` file (LF endings,
// arrays comma-separated, one `[partition k]` block per partition).
struct SessionMetadata {
  int version = 1;
  std::string session;
  std::vector<Index> dims;
  std::size_t nnz = 0;
  std::size_t parts = 0;
  int index_width_bits = 64;
  int value_width_bits = 64;
  std::string endianness = "LE";
  int index_base = 0;
  std::string flag_region;
  std::string result_region;
  std::vector<PartitionEntry> partitions;

  std::size_t order() const noexcept { return dims.size(); }
  bool operator==(const SessionMetadata&) const = default;
};

void write_metadata(const SessionMetadata& meta, std::ostream& out);
// Syntax and structural checks only. Width/endianness compatibility with
// this build is checked by the consumer so it can report a layout mismatch.
SessionMetadata read_metadata(std::istream& in);

// Writes to a sibling temp file then renames, so readers never see a
// partially written descriptor.
void write_metadata_file(const SessionMetadata& meta, const std::filesystem::path& path);
SessionMetadata read_metadata_file(const std::filesystem::path& path);

}  // namespace tshm
