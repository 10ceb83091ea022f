// Byte-level checks of everything an independent consumer reads: region
// names, the flag cell, the metadata text and the result region.
#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "support/oracles.hpp"
#include "tshm/consumer.hpp"
#include "tshm/error.hpp"
#include "tshm/producer.hpp"

using namespace tshm;
using namespace std::chrono_literals;

namespace {

template <class T>
T load(const std::byte* p) {
  T v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Interfaces, FlagCellWordsAtFixedOffsets) {
  const auto session = oracle::unique_session("iflag");
  auto flag = FlagCell::create(flag_region_name(session));
  const std::byte* raw = flag.region().data();
  EXPECT_EQ(load<std::uint32_t>(raw + 4), 0u);
  flag.signal(FlagStatus::ready);
  EXPECT_EQ(load<std::uint32_t>(raw + 4), 1u);
  flag.signal(FlagStatus::error, 0xabcd);
  EXPECT_EQ(load<std::uint32_t>(raw + 0), 0x54534D31u);
  EXPECT_EQ(load<std::uint32_t>(raw + 4), 3u);
  EXPECT_EQ(load<std::uint32_t>(raw + 8), 0xabcdu);
  ShmRegion::unlink(flag_region_name(session));
}

TEST(Interfaces, ExternalWritesToFlagAreObserved) {
  const auto session = oracle::unique_session("iflag2");
  auto flag = FlagCell::create(flag_region_name(session));
  auto raw = ShmRegion::attach(flag_region_name(session));
  const std::uint32_t ready = 1, done = 2;
  std::memcpy(raw.data() + 4, &ready, 4);
  EXPECT_EQ(flag.status(), FlagStatus::ready);
  std::memcpy(raw.data() + 4, &done, 4);
  EXPECT_NO_THROW(flag.await(FlagStatus::done, 10ms));
  const std::uint32_t garbage = 9;
  std::memcpy(raw.data() + 4, &garbage, 4);
  EXPECT_THROW(flag.status(), Error);
  ShmRegion::unlink(flag_region_name(session));
}

TEST(Interfaces, ResultRegionByteLayout) {
  KruskalModel m{{2, 3}, 2, {1.5, -2.0}, {FactorMatrix(2, 2), FactorMatrix(3, 2)}};
  for (std::size_t i = 0; i < 4; ++i) m.factors[0].data[i] = static_cast<double>(i) + 0.25;
  for (std::size_t i = 0; i < 6; ++i) m.factors[1].data[i] = -static_cast<double>(i);
  const std::size_t n = result_bytes(m.dims, m.rank);
  EXPECT_EQ(n, 8u + 8 + 8 + 2 * 8 + 2 * 8 + (2 * 2 + 3 * 2) * 8);
  std::vector<std::byte> buf(n);
  write_result(buf, m);
  const std::byte* p = buf.data();
  EXPECT_EQ(load<std::uint32_t>(p), 0x54534D52u);
  EXPECT_EQ(std::memcmp(p, "RMST", 4), 0);
  EXPECT_EQ(load<std::uint32_t>(p + 4), 1u);
  EXPECT_EQ(load<std::uint64_t>(p + 8), 2u);   // rank
  EXPECT_EQ(load<std::uint64_t>(p + 16), 2u);  // order
  EXPECT_EQ(load<std::uint64_t>(p + 24), 2u);
  EXPECT_EQ(load<std::uint64_t>(p + 32), 3u);
  EXPECT_EQ(load<double>(p + 40), 1.5);
  EXPECT_EQ(load<double>(p + 48), -2.0);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(load<double>(p + 56 + 8 * i), m.factors[0].data[i]);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(load<double>(p + 88 + 8 * i), m.factors[1].data[i]);
  EXPECT_EQ(read_result(buf), m);
}

TEST(Interfaces, ResultRegionRejectsCorruption) {
  KruskalModel m{{2}, 1, {1.0}, {FactorMatrix(2, 1)}};
  std::vector<std::byte> buf(result_bytes(m.dims, m.rank));
  write_result(buf, m);
  auto corrupt = [&](std::size_t off, std::uint64_t v, std::size_t width) {
    auto b = buf;
    std::memcpy(b.data() + off, &v, width);
    EXPECT_THROW(read_result(b), Error) << "offset " << off;
  };
  corrupt(0, 0x12345678, 4);
  corrupt(4, 2, 4);
  corrupt(8, 0, 8);
  corrupt(8, 1ull << 40, 8);
  corrupt(16, 0, 8);
  corrupt(24, 0, 8);
  corrupt(24, 100, 8);
  EXPECT_THROW(read_result(std::span(buf).first(20)), Error);
}

TEST(Interfaces, PublishedSessionMatchesDocumentedLayout) {
  const auto session = oracle::unique_session("ilayout");
  CooTensor t{{8, 6, 7}, {0, 0, 0, 4, 3, 3}, {2.0, 5.0}};
  const auto path = std::filesystem::temp_directory_path() / (session + ".meta");
  auto p = ProducerSession::publish(t, build_plan(t, 2), session, path);
  const std::string text = slurp(path);
  const std::string head = "version=1\nsession=" + session +
                           "\norder=3\ndims=8,6,7\nnnz=2\npartitions=2\nindex_width_bits=64\n"
                           "value_width_bits=64\nendianness=LE\nindex_base=0\nflag_region=/tshm-" +
                           session + "-flag\nresult_region=/tshm-" + session + "-result\n";
  EXPECT_EQ(text.substr(0, head.size()), head);
  // Grid [1,2,1]; mode-1 counts are 1,0,0,1,0,0 so the leftmost balanced cut is 1.
  const std::string p1 = "[partition 1]\ncoords_region=/tshm-" + session +
                         "-p1-coords\nvalues_region=/tshm-" + session +
                         "-p1-vals\nlower=0,1,0\nupper=7,5,6\ncount=1\ncapacity=1\n";
  EXPECT_NE(text.find(p1), std::string::npos) << text;

  auto coords = ShmRegion::attach("/tshm-" + session + "-p1-coords");
  auto vals = ShmRegion::attach("/tshm-" + session + "-p1-vals");
  EXPECT_EQ(load<std::uint64_t>(coords.data() + 0), 4u);
  EXPECT_EQ(load<std::uint64_t>(coords.data() + 8), 3u);
  EXPECT_EQ(load<std::uint64_t>(coords.data() + 16), 3u);
  EXPECT_EQ(load<double>(vals.data()), 5.0);
  auto flag = ShmRegion::attach("/tshm-" + session + "-flag");
  EXPECT_EQ(load<std::uint32_t>(flag.data() + 4), 1u);
}

TEST(Interfaces, HandWrittenResultIsAcceptedByProducer) {
  // Stands in for a foreign consumer: raw writes only, no library types.
  const auto session = oracle::unique_session("iforeign");
  CooTensor t{{3, 2}, {0, 0, 2, 1}, {1.0, 3.0}};
  const auto path = std::filesystem::temp_directory_path() / (session + ".meta");
  auto p = ProducerSession::publish(t, build_plan(t, 1), session, path);

  const std::size_t n = 4 + 4 + 8 + 8 + 2 * 8 + 8 + (3 + 2) * 8;
  {
    auto r = ShmRegion::create("/tshm-" + session + "-result", n);
    std::byte* w = r.data();
    auto put = [&](auto v) {
      std::memcpy(w, &v, sizeof v);
      w += sizeof v;
    };
    put(std::uint32_t{0x54534D52});
    put(std::uint32_t{1});
    put(std::uint64_t{1});
    put(std::uint64_t{2});
    put(std::uint64_t{3});
    put(std::uint64_t{2});
    put(4.0);
    for (int i = 0; i < 5; ++i) put(1.0);
    auto flag = ShmRegion::attach("/tshm-" + session + "-flag");
    std::atomic_ref<std::uint32_t>(*reinterpret_cast<std::uint32_t*>(flag.data() + 4))
        .store(2, std::memory_order_release);
  }
  auto m = p.await_done(1s);
  EXPECT_EQ(m.rank, 1u);
  EXPECT_EQ(m.weights, std::vector<double>{4.0});
  EXPECT_EQ(m.factors[1].data, (std::vector<double>{1.0, 1.0}));
}
