#include "tshm/kruskal.hpp"

#include <bit>
#include <cstring>

#include "tshm/error.hpp"

namespace tshm {

static_assert(std::endian::native == std::endian::little,
              "the wire formats assume a little-endian host");

void KruskalModel::validate() const {
  if (dims.empty()) throw Error(Errc::shape_mismatch, "model has no modes");
  if (rank == 0) throw Error(Errc::shape_mismatch, "model rank must be >= 1");
  if (weights.size() != rank)
    throw Error(Errc::shape_mismatch, "weights length != rank");
  if (factors.size() != dims.size())
    throw Error(Errc::shape_mismatch, "factor count != order");
  for (std::size_t m = 0; m < dims.size(); ++m) {
    const auto& f = factors[m];
    if (f.rows != dims[m] || f.cols != rank || f.data.size() != f.rows * f.cols)
      throw Error(Errc::shape_mismatch,
                  "factor " + std::to_string(m) + " has the wrong shape");
  }
}

namespace {

bool same_bits(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size_bytes()) == 0);
}

struct Cursor {
  std::span<const std::byte> in;
  std::size_t pos = 0;

  template <class T>
  T take() {
    if (in.size() - pos < sizeof(T))
      throw Error(Errc::corrupt, "result region truncated");
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }
  void take_doubles(std::span<double> out) {
    if ((in.size() - pos) / sizeof(double) < out.size())
      throw Error(Errc::corrupt, "result region truncated");
    std::memcpy(out.data(), in.data() + pos, out.size_bytes());
    pos += out.size_bytes();
  }
};

}  // namespace

bool bitwise_equal(const KruskalModel& a, const KruskalModel& b) {
  if (a.dims != b.dims || a.rank != b.rank || a.factors.size() != b.factors.size())
    return false;
  if (!same_bits(a.weights, b.weights)) return false;
  for (std::size_t m = 0; m < a.factors.size(); ++m)
    if (a.factors[m].rows != b.factors[m].rows ||
        a.factors[m].cols != b.factors[m].cols ||
        !same_bits(a.factors[m].data, b.factors[m].data))
      return false;
  return true;
}

std::size_t result_bytes(std::span<const Index> dims, std::size_t rank) {
  std::size_t n = 8 + 8 + 8 + 8 * dims.size() + 8 * rank;
  for (Index d : dims) n += 8 * static_cast<std::size_t>(d) * rank;
  return n;
}

void write_result(std::span<std::byte> out, const KruskalModel& model) {
  model.validate();
  if (out.size() < result_bytes(model.dims, model.rank))
    throw Error(Errc::invalid_argument, "result buffer too small");
  std::byte* p = out.data();
  auto put = [&p](const void* src, std::size_t n) {
    std::memcpy(p, src, n);
    p += n;
  };
  const std::uint32_t magic = kResultMagic, version = kResultVersion;
  const std::uint64_t rank = model.rank, order = model.order();
  put(&magic, 4);
  put(&version, 4);
  put(&rank, 8);
  put(&order, 8);
  put(model.dims.data(), 8 * model.dims.size());
  put(model.weights.data(), 8 * model.weights.size());
  for (const auto& f : model.factors) put(f.data.data(), 8 * f.data.size());
}

KruskalModel read_result(std::span<const std::byte> in) {
  Cursor c{in};
  if (c.take<std::uint32_t>() != kResultMagic)
    throw Error(Errc::corrupt, "result region magic mismatch");
  if (auto v = c.take<std::uint32_t>(); v != kResultVersion)
    throw Error(Errc::corrupt, "unsupported result version " + std::to_string(v));
  KruskalModel model;
  model.rank = c.take<std::uint64_t>();
  const auto order = c.take<std::uint64_t>();
  if (model.rank == 0 || order == 0 || order > in.size() / 8 ||
      model.rank > in.size() / 8)
    throw Error(Errc::corrupt, "result header has an implausible shape");
  for (std::uint64_t m = 0; m < order; ++m) {
    model.dims.push_back(c.take<std::uint64_t>());
    if (model.dims.back() == 0 || model.dims.back() > in.size() / 8 / model.rank)
      throw Error(Errc::corrupt, "result header has an implausible mode size");
  }
  if (in.size() < result_bytes(model.dims, model.rank))
    throw Error(Errc::corrupt, "result region shorter than its header implies");
  model.weights.resize(model.rank);
  c.take_doubles(model.weights);
  for (Index d : model.dims) {
    FactorMatrix f(d, model.rank);
    c.take_doubles(f.data);
    model.factors.push_back(std::move(f));
  }
  return model;
}

}  // namespace tshm
