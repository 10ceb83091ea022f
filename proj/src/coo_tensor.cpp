#include "tshm/coo_tensor.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "tshm/error.hpp"

namespace tshm {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' ||
                                 line[pos] == '\r'))
      ++pos;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t' &&
           line[end] != '\r')
      ++end;
    if (end > pos) tokens.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return tokens;
}

std::string where(std::size_t line_no) {
  return "line " + std::to_string(line_no) + ": ";
}

Index parse_coordinate(std::string_view token, std::size_t line_no) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw Error(Errc::parse, where(line_no) + "non-numeric coordinate '" +
                                 std::string(token) + "'");
  if (v < 1)
    throw Error(Errc::parse, where(line_no) + "coordinate " +
                                 std::to_string(v) + " is below 1");
  return static_cast<Index>(v - 1);
}

double parse_value(std::string_view token, std::size_t line_no) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw Error(Errc::parse, where(line_no) + "non-numeric value '" +
                                 std::string(token) + "'");
  return v;
}

}  // namespace

void CooTensor::validate() const {
  if (dims.empty())
    throw Error(Errc::invalid_argument, "tensor order must be at least 1");
  for (Index d : dims)
    if (d == 0) throw Error(Errc::invalid_argument, "mode size must be >= 1");
  if (coords.size() != order() * nnz())
    throw Error(Errc::invalid_argument,
                "coords length " + std::to_string(coords.size()) +
                    " != order*nnz " + std::to_string(order() * nnz()));
  for (std::size_t i = 0; i < coords.size(); ++i)
    if (coords[i] >= dims[i % order()])
      throw Error(Errc::out_of_bounds,
                  "element " + std::to_string(i / order()) + " mode " +
                      std::to_string(i % order()) + " index " +
                      std::to_string(coords[i]) + " >= " +
                      std::to_string(dims[i % order()]));
}

CooTensor parse_tns(std::istream& in,
                    std::optional<std::vector<Index>> dims_override) {
  CooTensor t;
  std::size_t order = dims_override ? dims_override->size() : 0;
  std::vector<Index> max_coord(order, 0);

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    if (order == 0) {
      if (tokens.size() < 2)
        throw Error(Errc::parse,
                    where(line_no) + "need at least one coordinate and a value");
      order = tokens.size() - 1;
      max_coord.assign(order, 0);
    }
    if (tokens.size() != order + 1)
      throw Error(Errc::parse, where(line_no) + "inconsistent token count: got " +
                                   std::to_string(tokens.size()) + ", expected " +
                                   std::to_string(order + 1));
    for (std::size_t m = 0; m < order; ++m) {
      Index c = parse_coordinate(tokens[m], line_no);
      max_coord[m] = std::max(max_coord[m], c + 1);
      t.coords.push_back(c);
    }
    t.values.push_back(parse_value(tokens[order], line_no));
  }
  if (in.bad()) throw Error(Errc::io, "read failure while parsing .tns");

  if (dims_override) {
    t.dims = std::move(*dims_override);
  } else {
    if (t.values.empty())
      throw Error(Errc::parse, "empty input: no data lines");
    t.dims = std::move(max_coord);
  }
  t.validate();
  return t;
}

CooTensor read_tns_file(const std::filesystem::path& path,
                        std::optional<std::vector<Index>> dims_override) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  return parse_tns(in, std::move(dims_override));
}

void emit_tns(const CooTensor& t, std::ostream& out) {
  const std::size_t d = t.order();
  std::string line;
  char buf[64];
  for (std::size_t i = 0; i < t.nnz(); ++i) {
    line.clear();
    for (std::size_t m = 0; m < d; ++m) {
      auto r = std::to_chars(buf, buf + sizeof buf, t.coords[i * d + m] + 1);
      line.append(buf, r.ptr);
      line.push_back(' ');
    }
    auto r = std::to_chars(buf, buf + sizeof buf, t.values[i]);
    line.append(buf, r.ptr);
    line.push_back('\n');
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
  }
  out.flush();
  if (!out) throw Error(Errc::io, "write failure while emitting .tns");
}

void write_tns_file(const CooTensor& t, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot open " + path.string());
  emit_tns(t, out);
}

double dense_lookup(const CooTensor& t, std::span<const Index> coord) {
  const std::size_t d = t.order();
  if (coord.size() != d)
    throw Error(Errc::out_of_bounds, "coordinate has wrong arity");
  for (std::size_t m = 0; m < d; ++m)
    if (coord[m] >= t.dims[m])
      throw Error(Errc::out_of_bounds, "coordinate out of bounds");
  for (std::size_t i = 0; i < t.nnz(); ++i) {
    if (std::equal(coord.begin(), coord.end(), t.coords.begin() + i * d))
      return t.values[i];
  }
  return 0.0;
}

}  // namespace tshm
