#include "tshm/consumer.hpp"

#include <algorithm>
#include <thread>

#include "tshm/error.hpp"

namespace tshm {

namespace {

using clock = std::chrono::steady_clock;

// Retries `attempt` with backoff until it succeeds or the deadline passes.
template <class F>
auto poll_until(clock::time_point deadline, const std::string& what, F&& attempt) {
  std::chrono::microseconds backoff{1};
  for (;;) {
    try {
      return attempt();
    } catch (const Error& e) {
      if (e.code() != Errc::not_found && e.code() != Errc::corrupt) throw;
      if (clock::now() >= deadline)
        throw TimeoutError(FlagStatus::init, "timed out waiting for " + what);
    }
    std::this_thread::sleep_for(backoff);
    backoff = std::min(backoff * 2, std::chrono::microseconds{1000});
  }
}

[[noreturn]] void reject(FlagCell& flag, std::uint32_t code, Errc errc,
                         const std::string& msg) {
  try {
    flag.signal(FlagStatus::error, code);
  } catch (const Error&) {
  }
  throw Error(errc, msg + " (signaled ERROR " + std::to_string(code) + ")");
}

}  // namespace

ConsumerSession attach_session(const std::filesystem::path& metadata_path,
                               std::chrono::nanoseconds timeout) {
  const auto deadline = clock::now() + timeout;
  ConsumerSession s;
  s.meta_ = poll_until(deadline, "metadata file " + metadata_path.string(),
                       [&] { return read_metadata_file(metadata_path); });
  const auto& meta = s.meta_;
  s.flag_ = poll_until(deadline, "flag region " + meta.flag_region,
                       [&] { return FlagCell::attach(meta.flag_region); });
  s.flag_.await(FlagStatus::ready,
                std::max(clock::duration::zero(), deadline - clock::now()));

  if (meta.index_width_bits != 64 || meta.value_width_bits != 64 ||
      meta.endianness != "LE" || meta.index_base != 0)
    reject(s.flag_, peer_code::layout_mismatch, Errc::layout_mismatch,
           "metadata declares index_width_bits=" + std::to_string(meta.index_width_bits) +
               " value_width_bits=" + std::to_string(meta.value_width_bits) +
               " endianness=" + meta.endianness +
               " index_base=" + std::to_string(meta.index_base) +
               "; this build needs 64/64/LE/0");

  const std::size_t d = meta.order();
  s.regions_.reserve(2 * meta.parts);
  s.views_.reserve(meta.parts);
  for (std::size_t k = 0; k < meta.parts; ++k) {
    const auto& p = meta.partitions[k];
    ShmRegion coords, values;
    try {
      coords = ShmRegion::attach(p.coords_region);
      values = ShmRegion::attach(p.values_region);
    } catch (const Error& e) {
      reject(s.flag_, peer_code::region_missing, Errc::not_found,
             "partition " + std::to_string(k) + ": " + e.what());
    }
    if (coords.size() != round_up8(p.capacity * d * sizeof(Index)) ||
        values.size() != round_up8(p.capacity * sizeof(double)))
      reject(s.flag_, peer_code::layout_mismatch, Errc::layout_mismatch,
             "partition " + std::to_string(k) + ": region lengths do not match capacity " +
                 std::to_string(p.capacity));
    for (std::size_t m = 0; m < d; ++m)
      if (p.box.lower[m] > p.box.upper[m] || p.box.upper[m] >= meta.dims[m])
        reject(s.flag_, peer_code::metadata_invalid, Errc::corrupt,
               "partition " + std::to_string(k) + ": box outside the tensor");

    PartitionView view{p.box, p.count, coords.view<const Index>(0, p.count * d),
                       values.view<double>(0, p.count)};
    if (auto bad = first_invalid_element(view, meta.dims); bad != view.count)
      reject(s.flag_, peer_code::metadata_invalid, Errc::out_of_bounds,
             "partition " + std::to_string(k) + ": element " + std::to_string(bad) +
                 " lies outside its bounding box");
    s.views_.push_back(std::move(view));
    s.regions_.push_back(std::move(coords));
    s.regions_.push_back(std::move(values));
  }
  s.attached_ = true;
  return s;
}

void ConsumerSession::fail(std::uint32_t code) {
  if (!attached_) throw Error(Errc::protocol, "fail() on an unattached session");
  flag_.signal(FlagStatus::error, code);
}

void finish(ConsumerSession& s, const KruskalModel& model) {
  if (!s.attached_) throw Error(Errc::protocol, "finish() before attach_session()");
  if (s.finished_) throw Error(Errc::protocol, "session already finished");
  model.validate();
  if (model.dims != s.meta_.dims)
    throw Error(Errc::shape_mismatch, "model dims do not match the session");
  ShmRegion result;
  try {
    result = ShmRegion::create(s.meta_.result_region, result_bytes(model.dims, model.rank));
  } catch (const Error& e) {
    reject(s.flag_, peer_code::region_missing, e.code(),
           std::string("cannot create result region: ") + e.what());
  }
  write_result(result.bytes(), model);
  s.flag_.signal(FlagStatus::done);
  s.finished_ = true;
}

std::uint64_t coordinate_hash(std::span<const Index> coord) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (Index c : coord)
    for (int b = 0; b < 8; ++b) {
      h ^= (c >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  return h;
}

SessionChecksums session_checksums(std::span<const PartitionView> views, std::size_t order) {
  SessionChecksums sum;
  for (const auto& v : views)
    for (std::size_t e = 0; e < v.count; ++e) {
      sum.valsum += v.values[e];
      sum.coordhash += coordinate_hash(v.coords.subspan(e * order, order));
      ++sum.nnz;
    }
  return sum;
}

}  // namespace tshm
