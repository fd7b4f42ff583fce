#include <gtest/gtest.h>

#include <sstream>

#include "robustnav/lp.hpp"
#include "support/lp_oracles.hpp"

using namespace robustnav;

namespace {

lp::Problem corner_example() {
  lp::Problem p(2, 2, 0);
  p.cost << -1, -1;
  p.ineq_matrix << 1, 0, 0, 1;
  p.ineq_rhs << 1, 1;
  p.var_lower.setZero();
  return p;
}

void expect_certificates(const lp::Problem& p, const lp::Solution& s) {
  ASSERT_EQ(s.status, lp::Status::Optimal);
  const auto r = lp::residuals(s, p);
  EXPECT_LE(r.primal, 1e-8);
  EXPECT_LE(r.dual_sign, 1e-10);
  EXPECT_LE(r.complementarity, 1e-8);
  EXPECT_LE(lp::duality_gap(s, p), 1e-8 * (1.0 + std::abs(s.objective)));
}

}  // namespace

TEST(LpSolve, BoxCornerOptimum) {
  const auto p = corner_example();
  const auto s = lp::solve(p);
  ASSERT_EQ(s.status, lp::Status::Optimal);
  EXPECT_NEAR(s.objective, -2.0, 1e-12);
  EXPECT_NEAR(s.primal[0], 1.0, 1e-12);
  EXPECT_NEAR(s.primal[1], 1.0, 1e-12);
  EXPECT_LE(lp::duality_gap(s, p), 1e-10);
  EXPECT_NEAR(s.dual_ineq[0], 1.0, 1e-12);
  EXPECT_NEAR(s.dual_ineq[1], 1.0, 1e-12);
}

TEST(LpSolve, ContradictoryBoundsInfeasible) {
  lp::Problem p(1, 1, 0);
  p.cost << 1;
  p.ineq_matrix << 1;
  p.ineq_rhs << -1;
  p.var_lower << 0;
  const auto s = lp::solve(p);
  EXPECT_EQ(s.status, lp::Status::Infeasible);
  // Farkas witness: y >= 0 on ineq rows, y^T A x > y^T b on the whole box x >= 0.
  ASSERT_EQ(s.certificate.size(), 1);
  EXPECT_GT(s.certificate[0], 0.0);
}

TEST(LpSolve, FarkasCertificateOnRandomInfeasible) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    // x in [0,1]^n, sum x >= n + 0.5 is infeasible.
    const int n = 2 + static_cast<int>(rng.below(5));
    lp::Problem p(n, 2, 0);
    for (int j = 0; j < n; ++j) p.cost[j] = rng.normal();
    p.var_lower.setZero();
    p.var_upper.setOnes();
    p.ineq_matrix.row(0).setConstant(-1.0);
    p.ineq_rhs[0] = -(n + 0.5);
    for (int j = 0; j < n; ++j) p.ineq_matrix(1, j) = rng.normal();
    p.ineq_rhs[1] = 10.0;
    const auto s = lp::solve(p);
    ASSERT_EQ(s.status, lp::Status::Infeasible);
    const Vector& y = s.certificate;
    ASSERT_EQ(y.size(), 2);
    EXPECT_GE(y.minCoeff(), -1e-12);
    // min over the box of y^T A x minus y^T b must be positive.
    const Vector w = p.ineq_matrix.transpose() * y;
    double minval = 0.0;
    for (int j = 0; j < n; ++j) minval += std::min(0.0, w[j]);
    EXPECT_GT(minval - y.dot(p.ineq_rhs), 0.0);
  }
}

TEST(LpSolve, UnboundedRay) {
  lp::Problem p(2, 1, 0);
  p.cost << -1, 0;
  p.ineq_matrix << -1, 1;
  p.ineq_rhs << 0;
  p.var_lower.setZero();
  const auto s = lp::solve(p);
  ASSERT_EQ(s.status, lp::Status::Unbounded);
  ASSERT_EQ(s.certificate.size(), 2);
  EXPECT_LT(p.cost.dot(s.certificate), 0.0);
  EXPECT_LE((p.ineq_matrix * s.certificate)[0], 1e-12);
  EXPECT_GE(s.certificate.minCoeff(), -1e-12);
}

TEST(LpSolve, EqualityAndFreeVariables) {
  // min x0 + 2 x1, x0 + x1 = 3, x0 - x1 <= 1, x free.
  lp::Problem p(2, 1, 1);
  p.cost << 1, 2;
  p.ineq_matrix << 1, -1;
  p.ineq_rhs << 1;
  p.eq_matrix << 1, 1;
  p.eq_rhs << 3;
  const auto s = lp::solve(p);
  ASSERT_EQ(s.status, lp::Status::Optimal);
  EXPECT_NEAR(s.primal[0], 2.0, 1e-12);
  EXPECT_NEAR(s.primal[1], 1.0, 1e-12);
  EXPECT_NEAR(s.objective, 4.0, 1e-12);
  expect_certificates(p, s);
}

TEST(LpSolve, ShapeMismatchRejected) {
  lp::Problem p(2, 1, 0);
  p.ineq_rhs.resize(2);
  EXPECT_THROW(lp::solve(p), ShapeMismatch);
  lp::Problem q(1, 0, 0);
  q.var_lower << 2;
  q.var_upper << 1;
  EXPECT_THROW(lp::solve(q), InvalidArgument);
}

TEST(LpDualityGap, RowScalingKeepsCertificate) {
  auto p = corner_example();
  p.ineq_matrix *= 10.0;
  p.ineq_rhs *= 10.0;
  const auto s = lp::solve(p);
  ASSERT_EQ(s.status, lp::Status::Optimal);
  EXPECT_LE(lp::duality_gap(s, p), 1e-8 * (1.0 + std::abs(s.objective)));
  EXPECT_NEAR(s.objective, -2.0, 1e-12);
}

TEST(LpDualityGap, RandomFeasibleBatch) {
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(30));
    const int m = static_cast<int>(rng.below(30));
    const int p = static_cast<int>(rng.below(std::min(n, 5) + 1)) % n;
    const auto prob = oracle::random_feasible_lp(rng, n, m, p);
    const auto s = lp::solve(prob);
    expect_certificates(prob, s);
    worst = std::max(worst, lp::duality_gap(s, prob) / (1.0 + std::abs(s.objective)));
  }
  EXPECT_LE(worst, 1e-8);
}

TEST(LpSolve, VertexEnumerationOracle) {
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(3));
    const int m = static_cast<int>(rng.below(9));
    const int p = static_cast<int>(rng.below(2)) % n;
    auto prob = oracle::random_feasible_lp(rng, n, m, p, /*allow_free=*/false);
    for (int j = 0; j < n; ++j)
      if (!std::isfinite(prob.upper(j))) prob.var_upper[j] = prob.var_lower[j] + 4.0 + rng.uniform();
    const double oracle = oracle::vertex_enumeration_min(prob);
    const auto s = lp::solve(prob);
    ASSERT_EQ(s.status, lp::Status::Optimal);
    EXPECT_NEAR(s.objective, oracle, 1e-8 * (1.0 + std::abs(oracle))) << "trial " << trial;
  }
}

TEST(LpSolve, DeterministicBitwise) {
  Rng rng(99);
  const auto prob = oracle::random_feasible_lp(rng, 20, 25, 3);
  const auto a = lp::solve(prob);
  const auto b = lp::solve(prob);
  ASSERT_EQ(a.primal.size(), b.primal.size());
  for (Eigen::Index j = 0; j < a.primal.size(); ++j) EXPECT_EQ(a.primal[j], b.primal[j]);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(LpSolve, DegenerateCyclingCandidate) {
  // Classic cycling example under largest-coefficient pricing.
  lp::Problem p(4, 3, 0);
  p.cost << -0.75, 150, -0.02, 6;
  p.ineq_matrix << 0.25, -60, -0.04, 9,
                   0.5, -90, -0.02, 3,
                   0, 0, 1, 0;
  p.ineq_rhs << 0, 0, 1;
  p.var_lower.setZero();
  const auto s = lp::solve(p);
  ASSERT_EQ(s.status, lp::Status::Optimal);
  EXPECT_NEAR(s.objective, -0.05, 1e-10);
  expect_certificates(p, s);
}

TEST(LpDump, OneConstraintPerLine) {
  std::ostringstream out;
  lp::dump(corner_example(), out);
  const std::string text = out.str();
  EXPECT_NE(text.find("minimize: - 1 x0 - 1 x1"), std::string::npos);
  EXPECT_NE(text.find("c0: 1 x0 <= 1"), std::string::npos);
  EXPECT_NE(text.find("x1 in [0, inf]"), std::string::npos);
}
