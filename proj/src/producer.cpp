#include "tshm/producer.hpp"

#include <algorithm>
#include <cstring>
#include <exception>

#include "tshm/error.hpp"

namespace tshm {

namespace {

void unlink_quietly(const std::string& name) noexcept {
  try {
    ShmRegion::unlink(name);
  } catch (const Error&) {
  }
}

}  // namespace

ProducerSession ProducerSession::publish(const CooTensor& t, const PartitionPlan& plan,
                                         std::string session,
                                         std::filesystem::path metadata_path) {
  validate_session_token(session);
  t.validate();
  if (plan.dims != t.dims || plan.boxes.size() != plan.parts ||
      plan.counts.size() != plan.parts)
    throw Error(Errc::invalid_argument, "partition plan does not match the tensor");

  const std::size_t d = t.order();
  const auto po = partition_order(plan, t);
  for (std::size_t k = 0; k < plan.parts; ++k)
    if (po.offsets[k + 1] - po.offsets[k] != plan.counts[k])
      throw Error(Errc::invalid_argument, "plan counts were not built from this tensor");
  const std::size_t capacity = std::max<std::size_t>(1, plan.capacity);

  ProducerSession s;
  s.metadata_path_ = std::move(metadata_path);
  auto& meta = s.meta_;
  meta.session = session;
  meta.dims = t.dims;
  meta.nnz = t.nnz();
  meta.parts = plan.parts;
  meta.flag_region = flag_region_name(session);
  meta.result_region = result_region_name(session);

  s.flag_ = FlagCell::create(meta.flag_region);
  s.created_.push_back(meta.flag_region);
  s.created_.push_back(meta.result_region);
  std::uint32_t fail_code = peer_code::region_missing;
  try {
    s.coords_.reserve(plan.parts);
    s.values_.reserve(plan.parts);
    for (std::size_t k = 0; k < plan.parts; ++k) {
      PartitionEntry entry{coords_region_name(session, k), values_region_name(session, k),
                           plan.boxes[k], plan.counts[k], capacity};
      s.coords_.push_back(ShmRegion::create(entry.coords_region, capacity * d * sizeof(Index)));
      s.created_.push_back(entry.coords_region);
      s.values_.push_back(ShmRegion::create(entry.values_region, capacity * sizeof(double)));
      s.created_.push_back(entry.values_region);
      meta.partitions.push_back(std::move(entry));
    }

    // Disjoint regions per partition; padding is already zero from create().
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t sk = 0; sk < static_cast<std::ptrdiff_t>(plan.parts); ++sk) {
      const auto k = static_cast<std::size_t>(sk);
      auto* coords = reinterpret_cast<Index*>(s.coords_[k].data());
      auto* values = reinterpret_cast<double*>(s.values_[k].data());
      std::size_t slot = 0;
      for (std::size_t j = po.offsets[k]; j < po.offsets[k + 1]; ++j, ++slot) {
        const std::size_t e = po.order[j];
        std::memcpy(coords + slot * d, t.coords.data() + e * d, d * sizeof(Index));
        values[slot] = t.values[e];
      }
    }

    fail_code = peer_code::metadata_invalid;
    write_metadata_file(meta, s.metadata_path_);
    s.wrote_metadata_ = true;
    s.flag_.signal(FlagStatus::ready);
  } catch (...) {
    try {
      s.flag_.signal(FlagStatus::error, fail_code);
    } catch (const Error&) {
    }
    s.teardown();
    throw;
  }
  return s;
}

ProducerSession::ProducerSession(ProducerSession&& other) noexcept
    : meta_(std::move(other.meta_)),
      metadata_path_(std::move(other.metadata_path_)),
      flag_(std::move(other.flag_)),
      coords_(std::move(other.coords_)),
      values_(std::move(other.values_)),
      created_(std::move(other.created_)),
      wrote_metadata_(other.wrote_metadata_),
      torn_down_(other.torn_down_),
      keep_(other.keep_) {
  // The source no longer owns anything.
  other.created_.clear();
  other.wrote_metadata_ = false;
  other.torn_down_ = true;
}

ProducerSession::~ProducerSession() {
  if (!keep_) teardown();
}

std::span<const Index> ProducerSession::coords(std::size_t k) const {
  if (k >= coords_.size()) throw Error(Errc::out_of_bounds, "no such partition");
  return coords_[k].view<Index>(0, meta_.partitions[k].capacity * meta_.order());
}

std::span<double> ProducerSession::values(std::size_t k) {
  if (k >= values_.size()) throw Error(Errc::out_of_bounds, "no such partition");
  return values_[k].view<double>(0, meta_.partitions[k].capacity);
}

KruskalModel ProducerSession::await_done(std::chrono::nanoseconds timeout) {
  if (torn_down_) throw Error(Errc::protocol, "session already torn down");
  flag_.await(FlagStatus::done, timeout);
  ShmRegion result;
  try {
    result = ShmRegion::attach(meta_.result_region);
  } catch (const Error& e) {
    throw Error(Errc::corrupt, std::string("consumer signaled DONE without a result: ") +
                                   e.what());
  }
  KruskalModel model = read_result(result.bytes());
  if (model.dims != meta_.dims)
    throw Error(Errc::corrupt, "result model dims do not match the session");
  return model;
}

void ProducerSession::teardown() noexcept {
  if (torn_down_) return;
  torn_down_ = true;
  coords_.clear();
  values_.clear();
  flag_ = FlagCell();
  for (const auto& name : created_) unlink_quietly(name);
  if (wrote_metadata_) {
    std::error_code ec;
    std::filesystem::remove(metadata_path_, ec);
  }
}

}  // namespace tshm
