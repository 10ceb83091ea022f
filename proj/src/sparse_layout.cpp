#include "tshm/sparse_layout.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include "tshm/error.hpp"
#include "tshm/metadata.hpp"

namespace tshm {

namespace {

std::uint64_t mix(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

}  // namespace

SparseDomain::SparseDomain(std::string session, std::vector<Index> dims)
    : session_(std::move(session)), dims_(std::move(dims)) {
  validate_session_token(session_);
  if (dims_.empty()) throw Error(Errc::invalid_argument, "domain order must be >= 1");
  for (Index n : dims_)
    if (n == 0) throw Error(Errc::invalid_argument, "mode size must be >= 1");
  capacity_ = kMinCapacity;
  coords_ = ShmRegion::create(layout_region_name(session_, "coords"),
                              capacity_ * order() * sizeof(Index));
  try {
    values_ = ShmRegion::create(layout_region_name(session_, "vals"),
                                capacity_ * sizeof(double));
  } catch (...) {
    ShmRegion::unlink(coords_.name());
    throw;
  }
  table_.assign(2 * kMinCapacity, npos);
}

SparseDomain::SparseDomain(SparseDomain&& other) noexcept
    : session_(std::move(other.session_)),
      dims_(std::move(other.dims_)),
      count_(other.count_),
      capacity_(other.capacity_),
      coords_(std::move(other.coords_)),
      values_(std::move(other.values_)),
      table_(std::move(other.table_)) {
  other.session_.clear();
}

SparseDomain::~SparseDomain() {
  if (session_.empty()) return;
  for (const auto* r : {&coords_, &values_}) {
    if (r->name().empty()) continue;
    try {
      ShmRegion::unlink(r->name());
    } catch (const Error&) {
    }
  }
}

SparseDomain SparseDomain::from_tensor(const CooTensor& t, std::string session) {
  t.validate();
  SparseDomain dom(std::move(session), t.dims);
  for (std::size_t i = 0; i < t.nnz(); ++i) {
    const std::size_t slot = dom.add_index(t.coord(i));
    dom.values_.view<double>(0, dom.capacity_)[slot] = t.values[i];
  }
  return dom;
}

void SparseDomain::check_bounds(std::span<const Index> coord) const {
  if (coord.size() != order())
    throw Error(Errc::out_of_bounds, "coordinate arity does not match the domain");
  for (std::size_t m = 0; m < order(); ++m)
    if (coord[m] >= dims_[m])
      throw Error(Errc::out_of_bounds, "coordinate " + std::to_string(coord[m]) +
                                           " out of bounds in mode " + std::to_string(m));
}

std::uint64_t SparseDomain::hash(std::span<const Index> coord) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ull;
  for (Index c : coord) h = mix(h ^ c) + 0x9e3779b97f4a7c15ull;
  return h;
}

bool SparseDomain::slot_matches(std::size_t slot, std::span<const Index> coord) const noexcept {
  const auto* stored = reinterpret_cast<const Index*>(coords_.data()) + slot * order();
  return std::equal(coord.begin(), coord.end(), stored);
}

std::size_t SparseDomain::find(std::span<const Index> coord) const {
  check_bounds(coord);
  const std::size_t mask = table_.size() - 1;
  for (std::size_t i = hash(coord) & mask;; i = (i + 1) & mask) {
    const std::size_t slot = table_[i];
    if (slot == npos) return npos;
    if (slot_matches(slot, coord)) return slot;
  }
}

bool SparseDomain::contains(std::span<const Index> coord) const { return find(coord) != npos; }

void SparseDomain::rebuild_index(std::size_t table_size) {
  table_.assign(table_size, npos);
  const std::size_t mask = table_size - 1;
  const auto* all = reinterpret_cast<const Index*>(coords_.data());
  for (std::size_t slot = 0; slot < count_; ++slot) {
    std::span<const Index> c(all + slot * order(), order());
    std::size_t i = hash(c) & mask;
    while (table_[i] != npos) i = (i + 1) & mask;
    table_[i] = slot;
  }
}

void SparseDomain::resize_storage(std::size_t new_capacity) {
  const std::size_t coord_bytes = new_capacity * order() * sizeof(Index);
  const std::size_t value_bytes = new_capacity * sizeof(double);
  if (new_capacity > capacity_) {
    coords_.grow(coord_bytes);
    values_.grow(value_bytes);
  } else if (new_capacity < capacity_) {
    coords_.shrink(coord_bytes);
    values_.shrink(value_bytes);
  }
  capacity_ = new_capacity;
}

std::size_t SparseDomain::add_index(std::span<const Index> coord) {
  if (std::size_t slot = find(coord); slot != npos) return slot;
  if (count_ == capacity_) resize_storage(std::max(kMinCapacity, 2 * capacity_));
  const std::size_t slot = count_;
  std::memcpy(coords_.data() + slot * order() * sizeof(Index), coord.data(),
              order() * sizeof(Index));
  values_.view<double>(0, capacity_)[slot] = 0.0;
  ++count_;
  if (2 * count_ > table_.size()) {
    rebuild_index(std::bit_ceil(4 * count_));
  } else {
    const std::size_t mask = table_.size() - 1;
    std::size_t i = hash(coord) & mask;
    while (table_[i] != npos) i = (i + 1) & mask;
    table_[i] = slot;
  }
  return slot;
}

void SparseDomain::set(std::span<const Index> coord, double value) {
  const std::size_t slot = find(coord);
  if (slot == npos)
    throw Error(Errc::not_found, "index must be added to the domain before storing a value");
  values_.view<double>(0, capacity_)[slot] = value;
}

double SparseDomain::get(std::span<const Index> coord) const {
  const std::size_t slot = find(coord);
  return slot == npos ? 0.0 : values_.view<double>(0, capacity_)[slot];
}

CooTensor SparseDomain::freeze() const {
  CooTensor t;
  t.dims = dims_;
  auto c = coords();
  auto v = values();
  t.coords.assign(c.begin(), c.end());
  t.values.assign(v.begin(), v.end());
  return t;
}

void SparseDomain::shrink_to_fit() { resize_storage(std::max(count_, kMinCapacity)); }

}  // namespace tshm
