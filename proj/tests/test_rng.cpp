#include <gtest/gtest.h>

#include "massim/rng.hpp"

using massim::Rng;

TEST(Rng, DeterministicStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, UniformRange) {
  Rng r(7);
  for (int i = 0; i < 10000; ++i) {
    double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, UniformIntRange) {
  Rng r(3);
  int seen[5] = {0, 0, 0, 0, 0};
  for (int i = 0; i < 5000; ++i) {
    int v = r.uniform_int(5);
    ASSERT_GE(v, 0);
    ASSERT_LT(v, 5);
    ++seen[v];
  }
  for (int c : seen) EXPECT_GT(c, 700);
}

TEST(Rng, ExponentialMean) {
  Rng r(11);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += r.exponential(3.0);
  EXPECT_NEAR(sum / n, 3.0, 0.05);
}

TEST(Rng, PoissonMean) {
  Rng r(13);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += r.poisson(0.3);
  EXPECT_NEAR(sum / n, 0.3, 0.01);
  EXPECT_EQ(Rng(1).poisson(0.0), 0);
}

TEST(Rng, DerivedStreamsDiffer) {
  auto s1 = Rng::derive(5, 1);
  auto s2 = Rng::derive(5, 2);
  auto s3 = Rng::derive(5, 1, 1);
  EXPECT_NE(s1, s2);
  EXPECT_NE(s1, s3);
  EXPECT_EQ(s1, Rng::derive(5, 1));
}
