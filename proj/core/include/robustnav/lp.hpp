#pragma once

#include <iosfwd>
#include <string>

#include "robustnav/common.hpp"

namespace robustnav::lp {

enum class Status { Optimal, Infeasible, Unbounded };

std::string to_string(Status status);

/// Dense linear program
///
///   minimize    cost . x
///   subject to  ineq_matrix x <= ineq_rhs
///               eq_matrix   x  = eq_rhs
///               var_lower <= x <= var_upper
///
/// Empty bound vectors mean the variable is free on that side. Bounds may be
/// +/-inf; every other entry must be finite.
struct Problem {
  Vector cost;
  Matrix ineq_matrix;
  Vector ineq_rhs;
  Matrix eq_matrix;
  Vector eq_rhs;
  Vector var_lower;
  Vector var_upper;

  Problem() = default;
  /// Allocates an all-zero problem with free variables.
  Problem(Eigen::Index vars, Eigen::Index ineq_rows, Eigen::Index eq_rows);

  Eigen::Index num_vars() const { return cost.size(); }
  Eigen::Index num_ineq() const { return ineq_rhs.size(); }
  Eigen::Index num_eq() const { return eq_rhs.size(); }

  double lower(Eigen::Index j) const { return var_lower.size() ? var_lower[j] : -kInf; }
  double upper(Eigen::Index j) const { return var_upper.size() ? var_upper[j] : kInf; }

  /// Throws ShapeMismatch or InvalidArgument.
  void validate() const;
};

struct Options {
  double feasibility_tol = 1e-8;   // absolute
  double optimality_tol = 1e-9;    // relative to 1 + max|cost|
  double pivot_tol = 1e-9;
  int refactor_interval = 64;
  int max_iterations = 0;  // 0: 100 (m + n) + 1000
};

/// Multipliers follow cost + ineq^T dual_ineq + eq^T dual_eq - reduced_cost = 0
/// with dual_ineq >= 0 and reduced_cost split into lower/upper bound multipliers.
struct Solution {
  Status status = Status::Infeasible;
  Vector primal;
  Vector dual_ineq;
  Vector dual_eq;
  Vector reduced_cost;
  double objective = 0.0;
  double dual_objective = 0.0;
  int iterations = 0;
  /// Final basis has a basic variable on a bound or a nonbasic zero reduced cost.
  bool degenerate = false;
  /// Unbounded: improving primal ray. Infeasible: phase-one multipliers over
  /// [ineq rows; eq rows] (a Farkas witness: y >= 0 on ineq rows and
  /// y^T A x - y^T b > 0 over the bound box).
  Vector certificate;
};

/// Revised simplex with bounded variables. Throws NumericalFailure if the
/// basis factorisation breaks down even after tolerance escalation.
Solution solve(const Problem& problem, const Options& options = {});

/// Dual objective of (dual_ineq, dual_eq) including bound multipliers read
/// off the implied reduced costs. Returns -inf if the reduced costs demand a
/// multiplier on an infinite bound beyond tolerance.
double dual_objective(const Problem& problem, const Vector& dual_ineq, const Vector& dual_eq);

/// |cost . x - dual objective|, recomputed from the problem data.
double duality_gap(const Solution& solution, const Problem& problem);

/// Residuals used by certificate checks.
struct Residuals {
  double primal = 0.0;           // max violation of rows and bounds
  double dual_sign = 0.0;        // max(-dual_ineq)
  double complementarity = 0.0;  // max |dual_ineq_i * slack_i|
};
Residuals residuals(const Solution& solution, const Problem& problem);

/// Plain-text dump, one constraint per line.
void dump(const Problem& problem, std::ostream& out);

}  // namespace robustnav::lp
