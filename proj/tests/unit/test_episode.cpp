#include <gtest/gtest.h>

#include "robustnav/episode.hpp"
#include "robustnav/suite.hpp"
#include "support/instances.hpp"

using namespace robustnav;
using namespace robustnav::sim;

namespace {

EpisodeConfig base(int edge, int m) {
  EpisodeConfig c;
  c.grid = oracle::make_grid(edge, 2);
  c.m = m;
  c.k = m;
  return c;
}

}  // namespace

TEST(Episode, FoundOnTheStartCell) {
  EpisodeConfig c = base(3, 1);
  c.object_cells = {c.start()};
  ScriptedPolicy p({Action::Found});
  const auto r = run_episode(c, p, 1);
  EXPECT_TRUE(r.success);
  EXPECT_EQ(r.steps, 1);
  EXPECT_DOUBLE_EQ(r.progress, 1.0);
  EXPECT_DOUBLE_EQ(r.spl, 1.0);
  EXPECT_EQ(r.found_step, std::vector<int>{1});
}

TEST(Episode, WrongFoundEndsTheEpisode) {
  EpisodeConfig c = base(3, 1);
  c.object_cells = {0};
  ScriptedPolicy p({Action::Found, Action::Forward});
  const auto r = run_episode(c, p, 1);
  EXPECT_FALSE(r.success);
  EXPECT_TRUE(r.wrong_found);
  EXPECT_EQ(r.steps, 1);
  EXPECT_DOUBLE_EQ(r.progress, 0.0);
  EXPECT_DOUBLE_EQ(r.ppl, 0.0);
}

TEST(Episode, MovesFollowTheHeadingAndStopAtWalls) {
  EpisodeConfig c = base(3, 1);
  c.object_cells = {0};
  c.max_steps = 5;
  // Start at 4 facing east: 5, then the wall, then north to 8.
  ScriptedPolicy p({Action::Forward, Action::Forward, Action::TurnLeft, Action::Forward, Action::TurnRight});
  const auto r = run_episode(c, p, 3);
  EXPECT_EQ(r.agent_cells, (std::vector<int>{4, 5, 5, 5, 8, 8}));
  EXPECT_EQ(r.traveled, 2);
  EXPECT_EQ(r.shortest, 2);
}

TEST(Episode, ScriptedWalkCollectsBothTargets) {
  EpisodeConfig c = base(3, 2);
  c.object_cells = {5, 3};
  c.task = robust::Task::UMON;
  ScriptedPolicy p({Action::Forward, Action::Found, Action::TurnLeft, Action::TurnLeft, Action::Forward,
                    Action::Forward, Action::Found});
  const auto r = run_episode(c, p, 0);
  EXPECT_TRUE(r.success);
  EXPECT_EQ(r.found_step, (std::vector<int>{2, 7}));
  EXPECT_EQ(r.shortest, 3);
  EXPECT_EQ(r.traveled, 3);
  EXPECT_DOUBLE_EQ(r.spl, 1.0);
}

TEST(Episode, SequentialTaskOnlyAcceptsTheNextTarget) {
  EpisodeConfig c = base(3, 2);
  c.task = robust::Task::SMON;
  c.object_cells = {3, 5};
  // Target 1 sits on 5 but target 0 is next: FOUND there is wrong.
  ScriptedPolicy p({Action::Forward, Action::Found});
  const auto r = run_episode(c, p, 0);
  EXPECT_TRUE(r.wrong_found);
  EXPECT_DOUBLE_EQ(r.progress, 0.0);
}

TEST(Episode, SameCellObservationOnlyClearsVisitedCells) {
  EpisodeConfig c = base(3, 1);
  c.observation = Observation::SameCell;
  c.object_cells = {0};
  c.max_steps = 1;
  GreedyBeliefPolicy g;
  const auto r = run_episode(c, g, 4);
  EXPECT_NE(r.actions[0], Action::Found);
}

TEST(Episode, DeterministicForEveryPolicy) {
  EpisodeConfig c = base(4, 2);
  c.moving_targets = true;
  c.family = DynamicsFamily::Drift;
  const auto net = make_score_network("l1", c.grid, 0);
  const auto sm = calibrate_score(net, draw_pairs(c.grid, c.family, 0.2, 50, 1), 0.1);
  for (auto kind : {PolicyKind::Neuro, PolicyKind::Random, PolicyKind::GreedyBelief}) {
    for (std::uint64_t seed : {0ULL, 7ULL}) {
      auto a = make_policy(kind, sm), b = make_policy(kind, sm);
      EXPECT_EQ(run_episode(c, *a, seed), run_episode(c, *b, seed)) << to_string(kind);
    }
  }
}

TEST(Episode, ResultInvariants) {
  EpisodeConfig c = base(4, 2);
  c.k = 3;
  for (auto kind : {PolicyKind::Neuro, PolicyKind::Random, PolicyKind::GreedyBelief}) {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
      auto p = make_policy(kind);
      const auto r = run_episode(c, *p, seed);
      if (r.success) EXPECT_DOUBLE_EQ(r.progress, 1.0);
      EXPECT_GE(r.spl, 0.0);
      EXPECT_LE(r.spl, r.progress);
      EXPECT_GE(r.ppl, 0.0);
      EXPECT_LE(r.ppl, r.progress);
      EXPECT_LE(r.steps, c.max_steps);
      EXPECT_EQ(r.agent_cells.size(), static_cast<std::size_t>(r.steps) + 1);
      for (std::size_t t = 1; t < r.agent_cells.size(); ++t) {
        const int a = r.agent_cells[t - 1], b = r.agent_cells[t];
        EXPECT_LE(std::abs(a % 4 - b % 4) + std::abs(a / 4 - b / 4), 1);
      }
      // Objects are placed on distinct cells away from the start.
      for (std::size_t i = 0; i < r.object_cells.size(); ++i) {
        EXPECT_NE(r.object_cells[i], c.start());
        for (std::size_t j = 0; j < i; ++j) EXPECT_NE(r.object_cells[i], r.object_cells[j]);
      }
    }
  }
}

TEST(Episode, BlendOneFollowsTheNetworkStandIn) {
  EpisodeConfig c = base(4, 1);
  c.blend_lambda = 1.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    NeuroPolicy n({});
    GreedyBeliefPolicy g;
    EXPECT_EQ(run_episode(c, n, seed).actions, run_episode(c, g, seed).actions);
  }
}

TEST(Episode, ConfigValidation) {
  EpisodeConfig c = base(3, 2);
  c.k = 1;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = base(3, 1);
  c.blend_lambda = 1.5;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = base(3, 1);
  c.object_cells = {9};
  EXPECT_THROW(c.validate(), InvalidArgument);
  EXPECT_THROW(parse_policy("oracle"), InvalidArgument);
  EXPECT_EQ(parse_policy("greedy-belief"), PolicyKind::GreedyBelief);
  EXPECT_EQ(parse_observation("same-cell"), Observation::SameCell);
}
