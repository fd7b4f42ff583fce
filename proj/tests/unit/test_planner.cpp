#include <gtest/gtest.h>

#include "robustnav/planner.hpp"
#include "robustnav/sampler.hpp"
#include "support/instances.hpp"

using namespace robustnav;
using namespace robustnav::robust;

namespace {

BeliefSequence capture_sequence(std::initializer_list<double> caps) {
  BeliefSequence seq;
  for (double c : caps) {
    Vector b = Vector::Zero(2);
    b[0] = c;
    b[1] = 1.0 - c;
    seq.push_back(b);
  }
  return seq;
}

// Singleton set {M}: L1 ball of radius 0 around the columns of M.
conformal::ObjectUncertainty point_set(const Matrix& m) {
  const int V = static_cast<int>(m.rows());
  conformal::ObjectUncertainty set;
  set.picnn = std::make_shared<const picnn::Params>(picnn::l1_ball_params(V, V, 0));
  for (int v = 0; v < V; ++v) set.contexts.push_back(m.col(v));
  set.q = 0.0;
  set.anchor = m;
  return set;
}

}  // namespace

TEST(Objective, UmonExamples) {
  const auto g = oracle::make_grid(3, 2, 0.9);
  EXPECT_EQ(objective_umon({capture_sequence({0, 0, 0})}, g), 0.0);
  EXPECT_NEAR(objective_umon({capture_sequence({0, 1, 1})}, g), 1.71, 1e-15);
  const auto g1 = oracle::make_grid(3, 4, 1.0);
  const auto seq = capture_sequence({0.3, 0.3, 0.3, 0.3, 0.3});
  EXPECT_NEAR(objective_umon({seq, seq, seq}, g1), 3 * 0.3 * 5, 1e-14);
}

TEST(Objective, SmonLengthTerm) {
  const auto g = oracle::make_grid(3, 2, 1.0);
  const auto seq = capture_sequence({0, 0.5, 0.5});
  const AgentPath still{g.start(), g.start(), g.start()};
  EXPECT_EQ(objective_smon({seq}, still, g, 1.0), objective_umon({seq}, g));
  const AgentPath straight{g.start(), g.start() + Point(1, 0), g.start() + Point(1, 1)};
  EXPECT_NEAR(path_length_term(straight, g), 2.0, 1e-15);
  EXPECT_NEAR(objective_smon({seq}, straight, g, 1.0), objective_umon({seq}, g) - 2.0, 1e-15);
  EXPECT_NEAR(objective_smon({seq}, straight, g, 1.0, true), objective_umon({seq}, g) + 2.0, 1e-15);
  EXPECT_EQ(objective_smon({seq}, straight, g, 0.0), objective_umon({seq}, g));
  EXPECT_THROW(objective_smon({seq, seq}, straight, g, 1.0), InvalidArgument);
}

TEST(Planner, ZeroHorizonIsTrivial) {
  const auto g = oracle::make_grid(3, 0);
  const ModelEvaluator ev(g, {Matrix::Identity(9, 9)}, {});
  const auto r = plan(g, ev, {.search = Search::Exhaustive});
  ASSERT_EQ(r.path.size(), 1u);
  EXPECT_EQ(r.path[0], g.start());
  EXPECT_EQ(r.robust_value, 0.0);
}

TEST(Planner, ExhaustiveMatchesDirectRolloutOfAllPaths) {
  const auto g = oracle::make_grid(3, 2);
  const Matrix id = Matrix::Identity(9, 9);
  const CounterpartEvaluator ev(g, {point_set(id)}, {});
  const auto r = plan(g, ev, {.search = Search::Exhaustive});
  double best = -kInf;
  int legal = 0;
  for (int a = 0; a < kMoves; ++a)
    for (int b = 0; b < kMoves; ++b) {
      const AgentPath path = apply_moves(g, g.start(), {a, b});
      if (path.empty()) continue;
      ++legal;
      const auto seq = rollout(g, path, id);
      double v = 0.0, gt = 1.0;
      for (const auto& beta : seq) {
        v += gt * beta[0];
        gt *= g.gamma;
      }
      best = std::max(best, v);
      EXPECT_GE(r.robust_value, v - 1e-9);
    }
  // Two straight unit steps from the centre of a 3 x 3 grid leave it.
  EXPECT_EQ(legal, 61);
  EXPECT_EQ(r.evaluations, legal);
  EXPECT_NEAR(r.robust_value, best, 1e-9);
  EXPECT_NO_THROW(validate_path(g, r.path));
  EXPECT_EQ(r.path.size(), 3u);
}

TEST(Planner, UnlimitedBeamEqualsExhaustive) {
  Rng rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    const auto g = oracle::make_grid(3, 3);
    const std::vector<Matrix> ms{draw_pair(g, DynamicsFamily::Drift, 0.3, rng).truth,
                                 draw_pair(g, DynamicsFamily::RandomWalk, 0.3, rng).truth};
    const ModelEvaluator ev(g, ms, {});
    const auto ex = plan(g, ev, {.search = Search::Exhaustive});
    const auto bm = plan(g, ev, {.search = Search::Beam, .beam_width = 0});
    EXPECT_EQ(ex.moves, bm.moves);
    EXPECT_EQ(ex.robust_value, bm.robust_value);
    const auto narrow = plan(g, ev, {.search = Search::Beam, .beam_width = 4});
    EXPECT_LE(narrow.robust_value, ex.robust_value + 1e-12);
    EXPECT_NO_THROW(validate_path(g, narrow.path));
  }
}

TEST(Planner, ExhaustiveDominatesEveryCandidate) {
  Rng rng(7);
  const auto g = oracle::make_grid(4, 2);
  std::vector<conformal::ObjectUncertainty> sets{oracle::random_set(g, rng, 0)};
  const CounterpartEvaluator ev(g, sets, {});
  const auto r = plan(g, ev, {.search = Search::Exhaustive});
  for (int a = 0; a < kMoves; ++a)
    for (int b = 0; b < kMoves; ++b) {
      const AgentPath path = apply_moves(g, g.start(), {a, b});
      if (!path.empty()) EXPECT_GE(r.robust_value, ev.capture(path));
    }
  EXPECT_GT(r.lp_solves, 0);
}

TEST(Planner, SmonPenalisesLength) {
  const auto g = oracle::make_grid(3, 2);
  const ModelEvaluator ev(g, {Matrix::Identity(9, 9)}, {});
  const auto costly = plan(g, ev, {.task = Task::SMON, .search = Search::Exhaustive, .length_weight = 10.0});
  const auto literal =
      plan(g, ev, {.task = Task::SMON, .search = Search::Exhaustive, .length_weight = 10.0, .literal_smon = true});
  EXPECT_EQ(path_length_term(costly.path, g), 0.0);
  EXPECT_GT(path_length_term(literal.path, g), 1.5);
  EXPECT_NEAR(literal.robust_value, literal.capture + 10.0 * path_length_term(literal.path, g), 1e-12);
  const ModelEvaluator two(g, {Matrix::Identity(9, 9), Matrix::Identity(9, 9)}, {});
  EXPECT_THROW(plan(g, two, {.task = Task::SMON}), InvalidArgument);
}

TEST(Planner, EvaluatorsAgreeOnPointSets) {
  Rng rng(2);
  const auto g = oracle::make_grid(3, 3);
  const Matrix m = draw_pair(g, DynamicsFamily::Drift, 0.2, rng).truth;
  const CounterpartEvaluator cp(g, {point_set(m)}, {});
  const CounterpartEvaluator alt(g, {point_set(m)}, {}, Method::Alternating);
  const ScenarioEvaluator sc(g, {point_set(m)}, {}, {.n_scenarios = 20}, 3);
  const ModelEvaluator model(g, {m}, {});
  const BasisModelEvaluator basis(g, {m}, {}, BasisKind::Indicator, 9);
  for (int trial = 0; trial < 10; ++trial) {
    const AgentPath path = oracle::random_path(g, 3, rng);
    const double ref = model.capture(path);
    EXPECT_NEAR(cp.capture(path), ref, 1e-9);
    EXPECT_NEAR(alt.capture(path), ref, 1e-9);
    EXPECT_NEAR(sc.capture(path), ref, 1e-9);
    EXPECT_NEAR(basis.capture(path), ref, 1e-10);
  }
}

TEST(Planner, Deterministic) {
  Rng rng(9);
  const auto g = oracle::make_grid(3, 3);
  std::vector<conformal::ObjectUncertainty> sets{oracle::random_set(g, rng, 0), oracle::random_set(g, rng, 1)};
  const CounterpartEvaluator ev(g, sets, {});
  const auto a = plan(g, ev, {.beam_width = 8, .threads = 1});
  const auto b = plan(g, ev, {.beam_width = 8, .threads = 3});
  EXPECT_EQ(a.moves, b.moves);
  EXPECT_EQ(a.robust_value, b.robust_value);
}

TEST(Moves, OffsetsAndBounds) {
  EXPECT_EQ(move_offset(0, 1.0), Point(0, 0));
  EXPECT_EQ(move_offset(1, 1.0), Point(1, 0));
  EXPECT_EQ(move_offset(3, 1.0), Point(0, 1));
  EXPECT_EQ(move_offset(5, 2.0), Point(-2, 0));
  EXPECT_NEAR(move_offset(2, 1.0).norm(), 1.0, 1e-15);
  EXPECT_THROW(move_offset(9, 1.0), InvalidArgument);
  const auto g = oracle::make_grid(2, 3);
  EXPECT_TRUE(apply_moves(g, g.start(), {1, 1}).empty());
  EXPECT_EQ(apply_moves(g, g.start(), {1, 5}).back(), g.start());
}
