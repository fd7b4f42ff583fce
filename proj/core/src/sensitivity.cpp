#include "robustnav/sensitivity.hpp"

#include <cmath>
#include <numbers>

namespace robustnav {

ValueGradient lp_value_gradient(const lp::Problem& problem, const lp::Solution& solution) {
  if (solution.status != lp::Status::Optimal)
    throw InvalidArgument("lp_value_gradient: solution is " + lp::to_string(solution.status));
  const Eigen::Index n = problem.num_vars();
  if (solution.primal.size() != n || solution.dual_ineq.size() != problem.num_ineq() ||
      solution.dual_eq.size() != problem.num_eq() || solution.reduced_cost.size() != n)
    throw InvalidArgument("lp_value_gradient: solution does not match the problem");
  ValueGradient g;
  g.d_value_d_rhs = -solution.dual_ineq;
  g.d_value_d_eq_rhs = -solution.dual_eq;
  g.d_value_d_cost = solution.primal;
  g.d_value_d_lower = Vector::Zero(n);
  g.d_value_d_upper = Vector::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double r = solution.reduced_cost[j];
    if (r > 0.0 && solution.primal[j] == problem.lower(j)) g.d_value_d_lower[j] = r;
    if (r < 0.0 && solution.primal[j] == problem.upper(j)) g.d_value_d_upper[j] = r;
  }
  g.degenerate = solution.degenerate;
  return g;
}

Vector gvm_combine(const Vector& g_env, const Vector& g_task) {
  if (g_env.size() != g_task.size()) throw DimensionMismatch("gvm_combine: gradients differ in length");
  const double dot = g_env.dot(g_task);
  if (dot >= 0.0) return g_env + g_task;
  // dot < 0 implies both norms are positive.
  const Vector env_perp = g_env - (dot / g_task.squaredNorm()) * g_task;
  const Vector task_perp = g_task - (dot / g_env.squaredNorm()) * g_env;
  return env_perp + task_perp;
}

std::string to_string(Action action) {
  switch (action) {
    case Action::Forward: return "FORWARD";
    case Action::TurnLeft: return "TURN-LEFT";
    case Action::TurnRight: return "TURN-RIGHT";
    case Action::Found: return "FOUND";
  }
  return "?";
}

Action blend_action(const FeedbackSignals& signals, Rng& rng) {
  if (!(signals.blend_lambda >= 0.0 && signals.blend_lambda <= 1.0))
    throw InvalidArgument("blend_lambda must lie in [0, 1]");
  return rng.uniform() < signals.blend_lambda ? signals.a_net : signals.a_task;
}

Action task_action_offset(const AgentPath& path, double heading, double capture_here, double found_threshold) {
  if (path.size() < 2) throw InvalidArgument("task_action_offset: path needs at least two points");
  const Point step = path[1] - path[0];
  if (step.norm() < 1e-12) return capture_here >= found_threshold ? Action::Found : Action::TurnLeft;
  double err = std::atan2(step.y(), step.x()) - heading;
  err = std::remainder(err, 2.0 * std::numbers::pi);
  if (std::abs(err) <= 0.25 * std::numbers::pi + 1e-9) return Action::Forward;
  return err > 0.0 ? Action::TurnLeft : Action::TurnRight;
}

}  // namespace robustnav
