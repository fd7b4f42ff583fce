#pragma once

#include <vector>

#include "robustnav/belief.hpp"
#include "robustnav/conformal.hpp"
#include "robustnav/lp.hpp"
#include "robustnav/picnn.hpp"

namespace robustnav::robust {

// Sign convention: the adversary maximises J = -sum_t gamma^t (beta^t)_0, the
// negated discounted capture of one object. Every value in this header is in
// J units; planners report capture = -J.

struct CounterpartOptions {
  double slack_penalty = 1e6;  // P on the output-row slack of every column
  lp::Options lp;
  int max_rounds = 50;         // alternating mode
  double round_tol = 1e-6;
};

/// Relaxed column sets P_v = {k : A_v k <= b_v, 0 <= m <= 1} of one object,
/// with the coordinate maxima hi(u, v) = max {m_u : k in P_v}.
struct ObjectPolytopes {
  int cells = 0;
  std::vector<picnn::Embedding> columns;  // no rows when q = +inf (box only)
  Matrix hi;
  std::vector<std::vector<int>> hi_order;  // per column, rows u by decreasing hi(u, v)
  int lp_solves = 0;
};

/// Builds the column embeddings at the set's threshold and the maxima hi.
/// Throws EmptySet if some column polytope is empty.
ObjectPolytopes make_polytopes(const conformal::ObjectUncertainty& set, const CounterpartOptions& options = {});

/// Everything the inner problem depends on for one fixed path.
struct CounterpartInput {
  GridSpec grid;
  AgentPath path;                                // p_0 .. p_tau
  std::vector<const ObjectPolytopes*> objects;
  std::vector<Vector> initial;                   // prior belief per object (V + 1)
};

/// Elementwise upper bound on the cell beliefs beta^0 .. beta^{tau-1} reachable
/// by any row-stochastic M whose columns lie in the polytopes. Exact when every
/// polytope is a single point.
std::vector<Vector> belief_envelope(const GridSpec& grid, const AgentPath& path, const ObjectPolytopes& poly,
                                    const Vector& initial);

/// Beliefs of the linear dynamics beta^t = d^t .* (M^T beta^{t-1}) with
/// capture 1 - sum of cells, for matrices that need not be row-stochastic.
/// Returns cell beliefs beta^0 .. beta^tau.
std::vector<Vector> linear_rollout(const GridSpec& grid, const AgentPath& path, const Matrix& m,
                                   const Vector& initial);
/// J of the linear dynamics.
double linear_value(const GridSpec& grid, const AgentPath& path, const Matrix& m, const Vector& initial);

/// J of the exact belief recursion under a row-stochastic M.
double adversarial_value(const GridSpec& grid, const AgentPath& path, const Matrix& m, const Vector& initial);

/// Dual of the frozen-belief inner maximisation, in minimisation form.
///
/// Per object, with beliefs frozen at beta_hat^{t-1}:
///   min  sum_t lambda^t + c . mu + sum_v b_v . xi^v
///   s.t. sum_t pi^t_v (C beta_hat^{t-1}) - A_v^T xi^v <= 0     (k^v rows)
///        D_t nu^t - pi^t <= 0                                  (alpha^t rows, t >= 1)
///        lambda^t + gamma^t = 0, -lambda^t - nu^t_v <= 0       (beta^t rows, t >= 1)
///        lambda^0 + mu_0 + 1 = 0, -lambda^0 - mu_v <= 0        (beta^0 rows)
///        xi >= 0, xi^v on the output row <= slack_penalty
/// A_v stacks the embedding rows and the V box rows m <= 1. Objects are
/// independent blocks of one LP.
struct RobustCounterpart {
  struct Block {
    int offset = 0;
    int size = 0;
  };
  struct ObjectLayout {
    Block pi;                // tau * V, index (t - 1) * V + v
    Block nu;                // tau * V
    Block lambda;            // tau + 1
    Block mu;                // V + 1
    std::vector<Block> xi;   // per column, rows of A_v
    std::vector<int> k_row;  // first LP row of the k^v block per column
    std::vector<int> k_size; // V + L d per column
  };

  GridSpec grid;
  AgentPath path;
  int cells = 0;
  int horizon = 0;
  Matrix s;                  // V x (V+1) cell selector
  Matrix e_row;              // 1 x (V+1) all ones
  std::vector<Matrix> d;     // D_t, t = 1..tau (entry t-1)
  Vector gamma_pow;          // gamma^t, t = 0..tau
  std::vector<ObjectLayout> layout;
  std::vector<std::vector<Vector>> frozen;  // per object, beta_hat^0 .. beta_hat^{tau-1}
  lp::Problem dual;
};

/// Assembles the dual LP; `frozen` holds per-object cell beliefs for
/// t = 0 .. tau - 1. Throws ShapeMismatch.
RobustCounterpart build_dual_counterpart(const CounterpartInput& input,
                                         const std::vector<std::vector<Vector>>& frozen,
                                         const CounterpartOptions& options = {});

enum class Method { FixedBelief, Alternating };
/// Decomposed: per-column support LPs of the primal. AssembledDual: one LP over
/// the multipliers above. Both give the same optimum.
enum class Route { Decomposed, AssembledDual };

struct CounterpartResult {
  double value = 0.0;            // sum over objects of J
  double certified_bound = 0.0;  // frozen-envelope bound (first round)
  bool certified = true;         // false for alternating results
  bool converged = true;
  int rounds = 1;
  int lp_solves = 0;
  std::vector<Matrix> maximizers;  // per object, column v = maximising M^v
  std::vector<double> object_value;
};

/// FixedBelief returns the envelope bound, which is >= the inner maximum over
/// row-stochastic members. Alternating refreezes the beliefs at the rollout of
/// the current maximiser until the value moves by less than round_tol; its
/// value is a local estimate and is flagged uncertified (converged = false
/// when the round budget runs out).
CounterpartResult solve_counterpart(const CounterpartInput& input, Method method, Route route = Route::Decomposed,
                                    const CounterpartOptions& options = {});

/// Solves an assembled counterpart; returns the total J bound and fills
/// per-object maximisers read from the multipliers of the k rows.
CounterpartResult solve_dual_counterpart(const RobustCounterpart& rc, const CounterpartOptions& options = {});

}  // namespace robustnav::robust
