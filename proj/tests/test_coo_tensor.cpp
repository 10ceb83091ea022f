#include <gtest/gtest.h>

#include <cstring>
#include <random>
#include <sstream>

#include "support/oracles.hpp"
#include "tshm/coo_tensor.hpp"
#include "tshm/error.hpp"

using namespace tshm;

namespace {

CooTensor parse(const std::string& text, std::optional<std::vector<Index>> dims = {}) {
  std::istringstream in(text);
  return parse_tns(in, std::move(dims));
}

std::string emit(const CooTensor& t) {
  std::ostringstream out;
  emit_tns(t, out);
  return out.str();
}

Errc parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a parse failure";
  return Errc::invalid_argument;
}

}  // namespace

TEST(CooTensor, ParsesOneBasedLinesToZeroBased) {
  auto t = parse("1 1 1 2.0\n4 3 3 5.0\n");
  EXPECT_EQ(t.order(), 3u);
  EXPECT_EQ(t.nnz(), 2u);
  EXPECT_EQ(t.dims, (std::vector<Index>{4, 3, 3}));
  EXPECT_EQ(t.coords, (std::vector<Index>{0, 0, 0, 3, 2, 2}));
  EXPECT_EQ(t.values, (std::vector<double>{2.0, 5.0}));
}

TEST(CooTensor, DimsAreMaxCoordinatePerMode) {
  // Shape of chicago-crime: 6186 x 24 x 77 x 32.
  auto t = parse("# header comment\n1 1 1 1 1\n6186 3 77 2 4\n17 24 5 32 1.5\n");
  EXPECT_EQ(t.dims, (std::vector<Index>{6186, 24, 77, 32}));
}

TEST(CooTensor, RejectsMalformedInput) {
  EXPECT_EQ(parse_error("2 2 0.5\n1 1 1 1.0\n"), Errc::parse);
  EXPECT_EQ(parse_error("1 x 1 1.0\n"), Errc::parse);
  EXPECT_EQ(parse_error("1 1 abc\n"), Errc::parse);
  EXPECT_EQ(parse_error("0 1 1.0\n"), Errc::parse);
  EXPECT_EQ(parse_error("-3 1 1.0\n"), Errc::parse);
  EXPECT_EQ(parse_error("# only a comment\n\n"), Errc::parse);
  EXPECT_EQ(parse_error(""), Errc::parse);
}

TEST(CooTensor, OverrideAllowsEmptyTrailingSlices) {
  auto t = parse("1 2 3.0\n", std::vector<Index>{5, 7});
  EXPECT_EQ(t.dims, (std::vector<Index>{5, 7}));
  EXPECT_THROW(parse("6 1 1.0\n", std::vector<Index>{5, 7}), Error);
}

TEST(CooTensor, KeepsDuplicatesVerbatim) {
  auto t = parse("1 1 1.0\n1 1 2.0\n");
  EXPECT_EQ(t.nnz(), 2u);
  std::vector<Index> c{0, 0};
  EXPECT_EQ(dense_lookup(t, c), 1.0);
}

TEST(CooTensor, EmitsOneBasedShortestValues) {
  CooTensor t{{1}, {0}, {3.5}};
  EXPECT_EQ(emit(t), "1 3.5\n");
}

TEST(CooTensor, EmptyTensorRoundTripsWithOverride) {
  CooTensor t{{3, 4}, {}, {}};
  EXPECT_EQ(emit(t), "");
  EXPECT_EQ(parse("", std::vector<Index>{3, 4}), t);
}

TEST(CooTensor, RoundTripIsBitExact) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 5; ++trial) {
    auto t = oracle::random_tensor(rng, {17, 9, 30}, 1000);
    // Hit awkward doubles too.
    t.values[0] = 0.1;
    t.values[1] = -1e-300;
    t.values[2] = 1.0 / 3.0;
    t.values[3] = -0.0;
    auto back = parse(emit(t), t.dims);
    ASSERT_EQ(back.coords, t.coords);
    ASSERT_EQ(back.values.size(), t.values.size());
    EXPECT_EQ(std::memcmp(back.values.data(), t.values.data(), t.values.size() * 8), 0);
  }
}

TEST(CooTensor, CoordinatesAreElementMajorAndInBounds) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Index> dims;
    const auto d = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
    for (std::size_t m = 0; m < d; ++m)
      dims.push_back(std::uniform_int_distribution<Index>(1, 12)(rng));
    auto t = oracle::random_tensor(rng, dims, 200);
    auto ref = oracle::tuples(t);
    for (std::size_t i = 0; i < t.nnz(); ++i) {
      auto c = t.coord(i);
      ASSERT_TRUE(std::equal(c.begin(), c.end(), ref[i].first.begin()));
      for (std::size_t m = 0; m < d; ++m) ASSERT_LT(c[m], t.dims[m]);
    }
    EXPECT_NO_THROW(t.validate());
  }
}

TEST(CooTensor, DenseLookup) {
  auto t = parse("1 1 1 2.0\n4 3 3 5.0\n");
  std::vector<Index> present{3, 2, 2}, absent{0, 1, 0}, outside{4, 0, 0};
  EXPECT_EQ(dense_lookup(t, present), 5.0);
  EXPECT_EQ(dense_lookup(t, absent), 0.0);
  EXPECT_THROW(dense_lookup(t, outside), Error);
}

TEST(CooTensor, ValidateCatchesBrokenInvariants) {
  EXPECT_THROW((CooTensor{{}, {}, {}}.validate()), Error);
  EXPECT_THROW((CooTensor{{0}, {}, {}}.validate()), Error);
  EXPECT_THROW((CooTensor{{2, 2}, {0}, {1.0}}.validate()), Error);
  EXPECT_THROW((CooTensor{{2, 2}, {0, 2}, {1.0}}.validate()), Error);
}
