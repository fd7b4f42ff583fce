#pragma once

#include <cstdint>
#include <vector>

#include "robustnav/belief.hpp"
#include "robustnav/conformal.hpp"

namespace robustnav::robust {

struct ScenarioOptions {
  int n_scenarios = 1000;     // candidate members per object, the anchor counts as one
  int hill_climb_steps = -1;  // -1: n_scenarios - 1
  int bisection_iters = 30;
  int rejection_budget = 10000;
};

struct ScenarioResult {
  double value = 0.0;              // sum over objects of the largest J found
  std::vector<double> object_value;
  std::vector<Matrix> worst;       // arg-max member per object
  int evaluations = 0;
};

/// Largest theta in [0, 1] (to 2^-iters) with from + theta (to - from) in the
/// set, assuming `from` is a member. Convex combinations of row-stochastic
/// matrices stay row-stochastic.
Matrix bisect_toward(const conformal::ObjectUncertainty& set, const Matrix& from, const Matrix& to, int iters);

/// A row-stochastic member: the set's anchor if it is one, else the first of
/// up to `budget` Dirichlet draws inside the set. Throws EmptySet.
Matrix find_member(const conformal::ObjectUncertainty& set, Rng& rng, int budget);

/// Brute-force inner maximisation over row-stochastic members of each set:
/// Dirichlet(1) rows pulled into the set by bisection toward a member, then
/// single-row hill climbing that stays inside. Returns a lower bound on the
/// adversarial optimum. Object i draws from Rng::derive(seed, i).
ScenarioResult inner_max_scenario(const GridSpec& grid, const AgentPath& path,
                                  const std::vector<conformal::ObjectUncertainty>& sets,
                                  const std::vector<Vector>& initial, const ScenarioOptions& options,
                                  std::uint64_t seed);

}  // namespace robustnav::robust
