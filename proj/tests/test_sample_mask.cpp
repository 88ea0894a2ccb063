#include <gtest/gtest.h>

#include "edr/rng.hpp"
#include "edr/sample_mask.hpp"

namespace edr {
namespace {

TEST(SampleMaskTest, SetTestCount) {
  SampleMask m(130);
  m.set(0);
  m.set(64);
  m.set(129);
  EXPECT_TRUE(m.test(64));
  EXPECT_FALSE(m.test(63));
  EXPECT_EQ(m.count(), 3u);
  EXPECT_EQ(m.indices(), (std::vector<std::size_t>{0, 64, 129}));
  EXPECT_EQ(m.words().size(), 3u);
}

TEST(SampleMaskTest, AllKeepsTailClear) {
  for (std::size_t n : {0u, 1u, 63u, 64u, 65u, 200u}) {
    EXPECT_EQ(SampleMask::all(n).count(), n);
  }
}

TEST(SampleMaskTest, KernelsMatchPerBitLoops) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = rng.uniform(300);
    auto random_mask = [&] { return SampleMask::from_predicate(n, [&](std::size_t) { return rng.bernoulli(0.3); }); };
    const SampleMask a = random_mask(), b = random_mask(), t1 = random_mask(), t2 = random_mask();
    std::size_t both = 0, c1 = 0, c2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      both += a.test(i) && b.test(i);
      c1 += (a.test(i) || b.test(i)) && t1.test(i);
      c2 += (a.test(i) || b.test(i)) && t2.test(i);
    }
    EXPECT_EQ(and_count(a.words(), b.words()), both);
    EXPECT_EQ((a & b).count(), both);
    const UnionCounts u = union_and_counts(a.words(), b.words(), t1.words(), t2.words());
    EXPECT_EQ(u.first, c1);
    EXPECT_EQ(u.second, c2);
    EXPECT_TRUE((a & b).subset_of(a));
    EXPECT_TRUE(a.subset_of(a | b));
  }
}

TEST(SampleMaskTest, SizeMismatchThrows) {
  SampleMask a(10), b(11);
  EXPECT_THROW(a |= b, std::invalid_argument);
  EXPECT_THROW(SampleMask::from_indices(4, std::vector<std::size_t>{4}), std::out_of_range);
}

}  // namespace
}  // namespace edr
