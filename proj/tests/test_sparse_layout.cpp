#include <gtest/gtest.h>

#include <chrono>
#include <map>
#include <random>
#include <sstream>

#include "support/oracles.hpp"
#include "tshm/cp_als.hpp"
#include "tshm/consumer.hpp"
#include "tshm/error.hpp"
#include "tshm/producer.hpp"
#include "tshm/sparse_layout.hpp"

using namespace tshm;
using namespace std::chrono_literals;

namespace {

using Coord = std::vector<Index>;

Coord random_coord(std::mt19937_64& rng, const std::vector<Index>& dims) {
  Coord c;
  for (Index n : dims) c.push_back(rng() % n);
  return c;
}

double live_checksum(const SparseDomain& d) {
  double s = 0;
  auto c = d.coords();
  auto v = d.values();
  for (std::size_t i = 0; i < d.count(); ++i) {
    double w = 1;
    for (std::size_t m = 0; m < d.order(); ++m) w += static_cast<double>(c[i * d.order() + m]) * (m + 1);
    s += w * v[i];
  }
  return s;
}

}  // namespace

TEST(SparseDomain, FreshDomainHasFloorCapacity) {
  SparseDomain d(oracle::unique_session("fresh"), {4, 4});
  EXPECT_EQ(d.capacity(), 4u);
  EXPECT_EQ(d.count(), 0u);
  EXPECT_EQ(d.coords_region().size(), 4u * 2 * 8);
  EXPECT_EQ(d.values_region().size(), 4u * 8);
}

TEST(SparseDomain, FifthAddDoublesCapacity) {
  SparseDomain d(oracle::unique_session("double"), {10, 10});
  for (Index i = 0; i < 5; ++i) {
    Coord c{i, 9 - i};
    EXPECT_EQ(d.add_index(c), i);
    d.set(c, static_cast<double>(i) + 0.5);
  }
  EXPECT_EQ(d.capacity(), 8u);
  EXPECT_EQ(d.count(), 5u);
  for (Index i = 0; i < 5; ++i) {
    Coord c{i, 9 - i};
    EXPECT_EQ(d.find(c), i);
    EXPECT_EQ(d.get(c), static_cast<double>(i) + 0.5);
  }
}

TEST(SparseDomain, AddIsIdempotent) {
  SparseDomain d(oracle::unique_session("idem"), {3, 3, 3});
  Coord c{1, 2, 0};
  const auto slot = d.add_index(c);
  d.set(c, 4.0);
  EXPECT_EQ(d.add_index(c), slot);
  EXPECT_EQ(d.count(), 1u);
  EXPECT_EQ(d.get(c), 4.0);
}

TEST(SparseDomain, SetGetAndZeroDefault) {
  SparseDomain d(oracle::unique_session("setget"), {5, 5});
  Coord a{2, 3}, never{0, 0};
  d.add_index(a);
  EXPECT_EQ(d.get(a), 0.0);
  d.set(a, 7.5);
  EXPECT_EQ(d.get(a), 7.5);
  EXPECT_EQ(d.get(never), 0.0);
  EXPECT_FALSE(d.contains(never));
  try {
    d.set(never, 1.0);
    FAIL() << "set on an un-added index must fail";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::not_found);
  }
  EXPECT_EQ(d.count(), 1u);
}

TEST(SparseDomain, OutOfBoundsRejected) {
  SparseDomain d(oracle::unique_session("oob"), {5, 5});
  Coord bad{5, 0}, short_coord{1};
  EXPECT_THROW(d.add_index(bad), Error);
  EXPECT_THROW(d.get(bad), Error);
  EXPECT_THROW(d.add_index(short_coord), Error);
  EXPECT_THROW(SparseDomain(oracle::unique_session("zero"), {0, 3}), Error);
}

TEST(SparseDomain, TenThousandAddsAgreeWithShadowMap) {
  std::mt19937_64 rng(1);
  const std::vector<Index> dims{50, 40, 30};
  SparseDomain d(oracle::unique_session("ten-k"), dims);
  std::map<Coord, std::size_t> shadow;
  for (int i = 0; i < 10000; ++i) {
    auto c = random_coord(rng, dims);
    const auto slot = d.add_index(c);
    auto [it, fresh] = shadow.emplace(c, shadow.size());
    ASSERT_EQ(slot, it->second);
  }
  EXPECT_EQ(d.count(), shadow.size());
  EXPECT_EQ(d.coords_region().size(), d.capacity() * 3 * 8);
  EXPECT_EQ(d.values_region().size(), d.capacity() * 8);
  for (const auto& [c, slot] : shadow) ASSERT_EQ(d.find(c), slot);
  auto coords = d.coords();
  for (const auto& [c, slot] : shadow)
    for (std::size_t m = 0; m < 3; ++m) ASSERT_EQ(coords[slot * 3 + m], c[m]);
}

TEST(SparseDomain, GrowPreservesChecksum) {
  std::mt19937_64 rng(2);
  const std::vector<Index> dims{1000, 1000};
  SparseDomain d(oracle::unique_session("grow"), dims);
  int grows = 0;
  for (int i = 0; i < 5000; ++i) {
    const double before = live_checksum(d);
    const auto cap = d.capacity();
    auto c = random_coord(rng, dims);
    const bool fresh = !d.contains(c);
    d.add_index(c);
    if (d.capacity() != cap) {
      ++grows;
      EXPECT_EQ(d.capacity(), 2 * cap);
      ASSERT_EQ(live_checksum(d), before);  // new slot holds 0.0
    }
    if (fresh) d.set(c, static_cast<double>(i % 97) - 40.0);
  }
  EXPECT_GE(grows, 10);
}

TEST(SparseDomain, FreezeIsASnapshot) {
  SparseDomain d(oracle::unique_session("freeze"), {4, 4});
  EXPECT_EQ(d.freeze().nnz(), 0u);
  Coord a{1, 1}, b{2, 2};
  d.add_index(a);
  d.set(a, 3.0);
  auto snap = d.freeze();
  d.add_index(b);
  d.set(a, 9.0);
  EXPECT_EQ(snap, (CooTensor{{4, 4}, {1, 1}, {3.0}}));
  EXPECT_EQ(d.freeze(), (CooTensor{{4, 4}, {1, 1, 2, 2}, {9.0, 0.0}}));
}

TEST(SparseDomain, ShrinkToFit) {
  SparseDomain d(oracle::unique_session("shrink"), {9, 9});
  for (Index i = 0; i < 5; ++i) {
    Coord c{i, i};
    d.add_index(c);
    d.set(c, static_cast<double>(i));
  }
  ASSERT_EQ(d.capacity(), 8u);
  d.shrink_to_fit();
  EXPECT_EQ(d.capacity(), 5u);
  EXPECT_EQ(d.values_region().size(), 5u * 8);
  EXPECT_EQ(d.coords_region().size(), 5u * 2 * 8);
  for (Index i = 0; i < 5; ++i) {
    Coord c{i, i};
    EXPECT_EQ(d.get(c), static_cast<double>(i));
  }
  Coord extra{8, 8};
  d.add_index(extra);
  EXPECT_EQ(d.capacity(), 10u);

  SparseDomain empty(oracle::unique_session("shrink0"), {3});
  empty.shrink_to_fit();
  EXPECT_EQ(empty.capacity(), 4u);
}

TEST(SparseDomain, RandomOperationsAgreeWithShadowMap) {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 3; ++round) {
    std::vector<Index> dims;
    const std::size_t order = 1 + rng() % 4;
    for (std::size_t m = 0; m < order; ++m) dims.push_back(1 + rng() % 12);
    SparseDomain d(oracle::unique_session("fuzz"), dims);
    std::map<Coord, double> shadow;
    for (int op = 0; op < 10000; ++op) {
      auto c = random_coord(rng, dims);
      switch (rng() % 10) {
        case 0:
        case 1:
        case 2:
          d.add_index(c);
          shadow.emplace(c, 0.0);
          break;
        case 3:
        case 4:
        case 5: {
          const double v = static_cast<double>(rng() % 1000) / 8.0;
          if (shadow.count(c)) {
            d.set(c, v);
            shadow[c] = v;
          } else {
            ASSERT_THROW(d.set(c, v), Error);
          }
          break;
        }
        case 6:
          d.shrink_to_fit();
          ASSERT_EQ(d.capacity(), std::max<std::size_t>(shadow.size(), 4));
          break;
        default: {
          auto it = shadow.find(c);
          ASSERT_EQ(d.get(c), it == shadow.end() ? 0.0 : it->second);
          ASSERT_EQ(d.contains(c), it != shadow.end());
        }
      }
      ASSERT_EQ(d.count(), shadow.size());
      ASSERT_LE(d.count(), d.capacity());
    }
    for (const auto& [c, v] : shadow) ASSERT_EQ(d.get(c), v);
  }
}

TEST(SparseDomain, DuplicatesInSourceTensorLastWins) {
  CooTensor t{{3, 3}, {0, 1, 2, 2, 0, 1}, {1.0, 2.0, 3.0}};
  auto d = SparseDomain::from_tensor(t, oracle::unique_session("dups"));
  EXPECT_EQ(d.count(), 2u);
  Coord c{0, 1};
  EXPECT_EQ(d.get(c), 3.0);
}

TEST(SparseDomain, RegionsAreNamedAndUnlinked) {
  const auto session = oracle::unique_session("names");
  {
    SparseDomain d(session, {3, 3});
    EXPECT_TRUE(ShmRegion::exists(layout_region_name(session, "coords")));
    EXPECT_TRUE(ShmRegion::exists(layout_region_name(session, "vals")));
    SparseDomain moved(std::move(d));
    Coord c{1, 2};
    moved.add_index(c);
  }
  EXPECT_FALSE(ShmRegion::exists(layout_region_name(session, "coords")));
  EXPECT_FALSE(ShmRegion::exists(layout_region_name(session, "vals")));
}

TEST(SparseDomain, HashLookupBeatsLinearScan) {
  std::mt19937_64 rng(4);
  const std::vector<Index> dims{1000, 1000, 1000};
  auto t = oracle::random_tensor(rng, dims, 100000);
  auto d = SparseDomain::from_tensor(t, oracle::unique_session("speed"));
  std::vector<Coord> probes;
  for (int i = 0; i < 300; ++i) {
    if (i % 2) {
      auto c = t.coord(rng() % t.nnz());
      probes.emplace_back(c.begin(), c.end());
    } else {
      probes.push_back(random_coord(rng, dims));
    }
  }
  using clock = std::chrono::steady_clock;
  double hashed = 0, scanned = 0;
  auto t0 = clock::now();
  for (const auto& c : probes) hashed += d.get(c);
  auto t1 = clock::now();
  for (const auto& c : probes) scanned += dense_lookup(t, c);
  auto t2 = clock::now();
  EXPECT_EQ(hashed, scanned);  // coordinates here are distinct with high probability
  const double speedup = std::chrono::duration<double>(t2 - t1).count() /
                         std::max(1e-9, std::chrono::duration<double>(t1 - t0).count());
  EXPECT_GE(speedup, 50.0);
}

TEST(SparseDomain, FrozenTensorPublishesWithSameFit) {
  std::mt19937_64 rng(5);
  const std::vector<Index> dims{14, 12, 10};
  std::map<Coord, double> distinct;
  while (distinct.size() < 500) distinct.emplace(random_coord(rng, dims), static_cast<double>(rng() % 1000) / 64.0);
  std::vector<std::pair<Coord, double>> shuffled(distinct.begin(), distinct.end());
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  std::string text;
  for (const auto& [c, v] : shuffled)
    text += std::to_string(c[0] + 1) + " " + std::to_string(c[1] + 1) + " " +
            std::to_string(c[2] + 1) + " " + std::to_string(v) + "\n";
  std::istringstream in(text);
  auto parsed = parse_tns(in, dims);

  auto domain = SparseDomain::from_tensor(parsed, oracle::unique_session("frz"));
  auto frozen = domain.freeze();
  const auto session = oracle::unique_session("frzpub");
  auto p = ProducerSession::publish(frozen, build_plan(frozen, 4), session,
                                    std::filesystem::temp_directory_path() / (session + ".meta"));
  auto c = attach_session(p.metadata_path(), 1s);
  const CpAlsOptions o{.rank = 4, .iterations = 5, .seed = 7};
  const double via_layout = cp_als(c.views(), c.dims(), o).fit;

  InMemoryPartitions direct(parsed, build_plan(parsed, 4));
  const double via_direct = cp_als(direct.views(), parsed.dims, o).fit;
  EXPECT_NEAR(via_layout, via_direct, 1e-12);
}
