#include <gtest/gtest.h>

#include <cmath>

#include "onc/rng.hpp"

using onc::CounterRng;

TEST(CounterRng, SameKeyReproducesStream) {
  CounterRng a(7, "costs", 3);
  CounterRng b(7, "costs", 3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(CounterRng, StreamsAreSeparated) {
  CounterRng a(7, "costs", 0);
  CounterRng b(7, "disturbances", 0);
  CounterRng c(7, "costs", 1);
  CounterRng d(8, "costs", 0);
  const auto x = a.next_u64();
  EXPECT_NE(x, b.next_u64());
  EXPECT_NE(x, c.next_u64());
  EXPECT_NE(x, d.next_u64());
}

TEST(CounterRng, UniformRangeAndMean) {
  CounterRng rng(1, "test");
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform(-0.5, 0.5);
    ASSERT_GE(u, -0.5);
    ASSERT_LT(u, 0.5);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.0, 5e-3);
}

TEST(CounterRng, ExponentialMeanIsInverseRate) {
  CounterRng rng(2, "sigma");
  const double rate = 4.0;
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double e = rng.exponential(rate);
    ASSERT_GE(e, 0.0);
    sum += e;
  }
  EXPECT_NEAR(sum / n, 1.0 / rate, 5e-3);
}

TEST(CounterRng, FrozenFirstDraws) {
  // Guards the bit-level recipe that all seeded artifacts depend on.
  CounterRng a(1, "costs", 0);
  CounterRng b(1, "costs", 0);
  const double u = a.uniform();
  EXPECT_EQ(u, static_cast<double>(b.next_u64() >> 11) * 0x1.0p-53);
  EXPECT_EQ(onc::splitmix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(onc::fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(onc::fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}
