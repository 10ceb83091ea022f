#include "tshm/metadata.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unistd.h>

#include "tshm/error.hpp"
#include "tshm/shm_region.hpp"

namespace tshm {

namespace {

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s.push_back(',');
    s += std::to_string(xs[i]);
  }
  return s;
}

[[noreturn]] void bad(std::size_t line_no, const std::string& msg) {
  throw Error(Errc::parse, "metadata line " + std::to_string(line_no) + ": " + msg);
}

template <class T>
T parse_number(std::string_view s, std::size_t line_no) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    bad(line_no, "expected an integer, got '" + std::string(s) + "'");
  return v;
}

std::vector<Index> parse_list(std::string_view s, std::size_t line_no) {
  std::vector<Index> out;
  if (s.empty()) return out;
  std::size_t pos = 0;
  for (;;) {
    auto comma = s.find(',', pos);
    out.push_back(parse_number<Index>(s.substr(pos, comma - pos), line_no));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

void validate_session_token(std::string_view session) {
  if (session.empty() || session.size() > 200)
    throw Error(Errc::invalid_argument, "session token must be 1..200 characters");
  for (char c : session) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    if (!ok)
      throw Error(Errc::invalid_argument,
                  "session token '" + std::string(session) + "' has invalid characters");
  }
}

std::string flag_region_name(std::string_view session) {
  return "/tshm-" + std::string(session) + "-flag";
}
std::string result_region_name(std::string_view session) {
  return "/tshm-" + std::string(session) + "-result";
}
std::string coords_region_name(std::string_view session, std::size_t partition) {
  return "/tshm-" + std::string(session) + "-p" + std::to_string(partition) + "-coords";
}
std::string values_region_name(std::string_view session, std::size_t partition) {
  return "/tshm-" + std::string(session) + "-p" + std::to_string(partition) + "-vals";
}
std::string layout_region_name(std::string_view session, std::string_view role) {
  return "/tshm-" + std::string(session) + "-layout-" + std::string(role);
}

void write_metadata(const SessionMetadata& meta, std::ostream& out) {
  std::ostringstream s;
  s << "version=" << meta.version << '\n'
    << "session=" << meta.session << '\n'
    << "order=" << meta.order() << '\n'
    << "dims=" << join(meta.dims) << '\n'
    << "nnz=" << meta.nnz << '\n'
    << "partitions=" << meta.parts << '\n'
    << "index_width_bits=" << meta.index_width_bits << '\n'
    << "value_width_bits=" << meta.value_width_bits << '\n'
    << "endianness=" << meta.endianness << '\n'
    << "index_base=" << meta.index_base << '\n'
    << "flag_region=" << meta.flag_region << '\n'
    << "result_region=" << meta.result_region << '\n';
  for (std::size_t k = 0; k < meta.partitions.size(); ++k) {
    const auto& p = meta.partitions[k];
    s << "[partition " << k << "]\n"
      << "coords_region=" << p.coords_region << '\n'
      << "values_region=" << p.values_region << '\n'
      << "lower=" << join(p.box.lower) << '\n'
      << "upper=" << join(p.box.upper) << '\n'
      << "count=" << p.count << '\n'
      << "capacity=" << p.capacity << '\n';
  }
  out << s.str();
  out.flush();
  if (!out) throw Error(Errc::io, "failed to write session metadata");
}

SessionMetadata read_metadata(std::istream& in) {
  SessionMetadata meta;
  meta.version = 0;
  std::size_t declared_order = 0;
  bool have_order = false, have_parts = false;
  PartitionEntry* current = nullptr;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.back() == '\r') bad(line_no, "CR line endings are not allowed");
    if (line.front() == '[') {
      const std::string prefix = "[partition ";
      if (line.rfind(prefix, 0) != 0 || line.back() != ']')
        bad(line_no, "malformed section header");
      auto k = parse_number<std::size_t>(
          std::string_view(line).substr(prefix.size(), line.size() - prefix.size() - 1),
          line_no);
      if (k != meta.partitions.size()) bad(line_no, "partition blocks out of order");
      current = &meta.partitions.emplace_back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) bad(line_no, "expected key=value");
    const std::string_view key = std::string_view(line).substr(0, eq);
    const std::string_view value = std::string_view(line).substr(eq + 1);

    if (current) {
      if (key == "coords_region") current->coords_region = value;
      else if (key == "values_region") current->values_region = value;
      else if (key == "lower") current->box.lower = parse_list(value, line_no);
      else if (key == "upper") current->box.upper = parse_list(value, line_no);
      else if (key == "count") current->count = parse_number<std::size_t>(value, line_no);
      else if (key == "capacity") current->capacity = parse_number<std::size_t>(value, line_no);
      else bad(line_no, "unknown partition key '" + std::string(key) + "'");
      continue;
    }
    if (key == "version") meta.version = parse_number<int>(value, line_no);
    else if (key == "session") meta.session = value;
    else if (key == "order") {
      declared_order = parse_number<std::size_t>(value, line_no);
      have_order = true;
    } else if (key == "dims") meta.dims = parse_list(value, line_no);
    else if (key == "nnz") meta.nnz = parse_number<std::size_t>(value, line_no);
    else if (key == "partitions") {
      meta.parts = parse_number<std::size_t>(value, line_no);
      have_parts = true;
    } else if (key == "index_width_bits") meta.index_width_bits = parse_number<int>(value, line_no);
    else if (key == "value_width_bits") meta.value_width_bits = parse_number<int>(value, line_no);
    else if (key == "endianness") meta.endianness = value;
    else if (key == "index_base") meta.index_base = parse_number<int>(value, line_no);
    else if (key == "flag_region") meta.flag_region = value;
    else if (key == "result_region") meta.result_region = value;
    else bad(line_no, "unknown key '" + std::string(key) + "'");
  }
  if (in.bad()) throw Error(Errc::io, "read failure on session metadata");

  auto fail = [](const std::string& msg) { throw Error(Errc::parse, "metadata: " + msg); };
  if (meta.version != 1) fail("unsupported or missing version");
  validate_session_token(meta.session);
  if (!have_order || declared_order == 0 || meta.dims.size() != declared_order)
    fail("order/dims missing or inconsistent");
  if (!have_parts || meta.parts == 0 || meta.partitions.size() != meta.parts)
    fail("partition count does not match partition blocks");
  validate_region_name(meta.flag_region);
  validate_region_name(meta.result_region);
  std::size_t total = 0;
  for (const auto& p : meta.partitions) {
    validate_region_name(p.coords_region);
    validate_region_name(p.values_region);
    if (p.box.lower.size() != declared_order || p.box.upper.size() != declared_order)
      fail("partition box arity != order");
    if (p.count > p.capacity || p.capacity == 0) fail("partition count exceeds capacity");
    total += p.count;
  }
  if (total != meta.nnz) fail("partition counts do not sum to nnz");
  return meta;
}

void write_metadata_file(const SessionMetadata& meta, const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot open " + tmp.string());
    write_metadata(meta, out);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(Errc::io, "cannot install metadata file " + path.string());
  }
}

SessionMetadata read_metadata_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::not_found, "cannot open metadata " + path.string());
  return read_metadata(in);
}

}  // namespace tshm
