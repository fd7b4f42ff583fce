#include <gtest/gtest.h>

#include "robustnav/sampler.hpp"
#include "support/instances.hpp"

using namespace robustnav;

TEST(Sampler, StationaryWithoutNoiseIsIdentity) {
  const GridSpec g = oracle::make_grid(4, 1);
  SyntheticSampler s(g, DynamicsFamily::Stationary, 0.0, 5);
  for (int i = 0; i < 10; ++i) {
    const auto p = s.next();
    EXPECT_TRUE(p.truth.isIdentity(0.0));
    EXPECT_TRUE(p.nominal.isIdentity(0.0));
  }
}

TEST(Sampler, RowsAreStochastic) {
  const GridSpec g = oracle::make_grid(4, 1);
  for (auto family : {DynamicsFamily::Drift, DynamicsFamily::RandomWalk, DynamicsFamily::Stationary}) {
    SyntheticSampler s(g, family, 0.4, 11);
    for (int i = 0; i < 20; ++i) {
      const auto p = s.next();
      EXPECT_NO_THROW(check_transition(p.truth, g.cells()));
      EXPECT_NO_THROW(check_transition(p.nominal, g.cells()));
      EXPECT_EQ(p.contexts.size(), static_cast<std::size_t>(g.cells()));
      EXPECT_EQ(p.contexts[0].size(), s.context_dim());
    }
  }
}

TEST(Sampler, DriftConcentratesOnTheDriftNeighbour) {
  const GridSpec g = oracle::make_grid(5, 1);
  SyntheticSampler s(g, DynamicsFamily::Drift, 0.0, 2);
  for (int i = 0; i < 20; ++i) {
    const auto p = s.next();
    const int dx = static_cast<int>(p.features[1]), dy = static_cast<int>(p.features[2]);
    ASSERT_TRUE(dx != 0 || dy != 0);
    const int u = 12;  // centre: every drift neighbour exists
    const int v = (2 + dy) * 5 + (2 + dx);
    EXPECT_GE(p.truth(u, v), 0.6);
    EXPECT_NEAR(p.truth(u, v) + p.truth(u, u), 1.0, 1e-15);
  }
}

TEST(Sampler, StreamIsReproducible) {
  const GridSpec g = oracle::make_grid(3, 1);
  SyntheticSampler a(g, DynamicsFamily::RandomWalk, 0.3, 9), b(g, DynamicsFamily::RandomWalk, 0.3, 9);
  for (int i = 0; i < 5; ++i) {
    const auto x = a.next(), y = b.next();
    EXPECT_EQ(x.truth, y.truth);
    EXPECT_EQ(x.features, y.features);
  }
}

TEST(Sampler, FamilyNames) {
  for (auto f : {DynamicsFamily::Drift, DynamicsFamily::RandomWalk, DynamicsFamily::Stationary})
    EXPECT_EQ(parse_family(to_string(f)), f);
  EXPECT_THROW(parse_family("brownian"), InvalidArgument);
  EXPECT_THROW(SyntheticSampler(oracle::make_grid(3, 1), DynamicsFamily::Drift, -0.1, 0), InvalidArgument);
}
