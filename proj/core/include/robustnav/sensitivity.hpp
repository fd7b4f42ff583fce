#pragma once

#include <string>

#include "robustnav/belief.hpp"
#include "robustnav/lp.hpp"

namespace robustnav {

/// Derivatives of the optimal value of a minimisation LP, read off an optimal
/// basis. At a degenerate optimum they are one-sided (a subgradient) and
/// `degenerate` is set.
struct ValueGradient {
  Vector d_value_d_rhs;     // per inequality row: -dual_ineq
  Vector d_value_d_eq_rhs;  // per equality row: -dual_eq
  Vector d_value_d_cost;    // primal
  Vector d_value_d_lower;   // reduced cost where the lower bound is active, else 0
  Vector d_value_d_upper;   // reduced cost where the upper bound is active, else 0
  bool degenerate = false;
};

/// Throws InvalidArgument unless the solution is optimal and matches the problem.
ValueGradient lp_value_gradient(const lp::Problem& problem, const lp::Solution& solution);

/// Sum of the two gradients when they agree (g_env . g_task >= 0); otherwise
/// each is projected onto the orthogonal complement of the other before
/// summing, so the result has a nonnegative inner product with both.
/// Throws DimensionMismatch.
Vector gvm_combine(const Vector& g_env, const Vector& g_task);

enum class Action { Forward = 0, TurnLeft = 1, TurnRight = 2, Found = 3 };
inline constexpr int kActions = 4;
std::string to_string(Action action);

struct FeedbackSignals {
  Action a_net = Action::Forward;
  Action a_task = Action::Forward;
  double blend_lambda = 0.0;  // probability of following a_net
  double r_env = 0.0;
  double r_task = 0.0;
};

/// a_net with probability blend_lambda, else a_task; one uniform draw from
/// `rng` per call. Throws InvalidArgument if blend_lambda is outside [0, 1].
Action blend_action(const FeedbackSignals& signals, Rng& rng);

/// Discrete action toward the first planned step p_1 - p_0 for an agent
/// facing `heading` (radians, counter-clockwise from +x). Angular error above
/// 45 degrees turns toward the step, otherwise FORWARD. A zero step gives
/// FOUND when `capture_here` reaches `found_threshold`, else TURN-LEFT.
/// Throws InvalidArgument for paths with fewer than two points.
Action task_action_offset(const AgentPath& path, double heading, double capture_here = 0.0,
                          double found_threshold = 0.9);

}  // namespace robustnav
