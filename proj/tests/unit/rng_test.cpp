#include <gtest/gtest.h>

#include <set>

#include "ledcma/rng.hpp"

namespace ledcma {
namespace {

TEST(RngStream, SameSeedReplaysSameSequence) {
  RngStream a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.normal(), b.normal());
  EXPECT_EQ(a.uniform_vector(5, -5.0, 5.0), b.uniform_vector(5, -5.0, 5.0));
}

TEST(RngStream, CopyReplaysFromCopyPoint) {
  RngStream a(7);
  a.normal();
  RngStream b = a;
  EXPECT_EQ(a.normal_vector(4), b.normal_vector(4));
}

TEST(RngStream, UniformStaysInBox) {
  RngStream rng(1);
  const Vector v = rng.uniform_vector(10000, -5.0, 5.0);
  EXPECT_GE(v.minCoeff(), -5.0);
  EXPECT_LT(v.maxCoeff(), 5.0);
}

TEST(DeriveSeed, NamedStreamsAreDistinct) {
  std::set<std::uint64_t> seeds;
  for (auto name : {streams::kRotation, streams::kInitialMean, streams::kSampling, streams::kTpa}) {
    seeds.insert(derive_seed(1, name));
  }
  EXPECT_EQ(seeds.size(), 4u);
  EXPECT_NE(derive_seed(1, streams::kSampling), derive_seed(2, streams::kSampling));
}

TEST(DeriveSeed, IndexedSeedsAreDistinctAndStable) {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 1000; ++i) seeds.insert(derive_seed(5, i));
  EXPECT_EQ(seeds.size(), 1000u);
  EXPECT_EQ(derive_seed(5, std::uint64_t{3}), derive_seed(5, std::uint64_t{3}));
}

}  // namespace
}  // namespace ledcma
