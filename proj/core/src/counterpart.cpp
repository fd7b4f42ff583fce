#include "robustnav/counterpart.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace robustnav::robust {

namespace {

// max sum_u a_u rho_u over 0 <= rho <= caps, sum rho <= budget, visiting u in
// `order` (decreasing a, a >= 0).
double knapsack(const std::vector<int>& order, const auto& a, const Vector& caps, double budget) {
  double value = 0.0, left = budget;
  for (int u : order) {
    if (left <= 0.0 || a(u) <= 0.0) break;
    const double take = std::min(caps[u], left);
    value += a(u) * take;
    left -= take;
  }
  return value;
}

std::vector<int> order_by_decreasing(const Vector& a) {
  std::vector<int> idx(a.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) { return a[i] > a[j]; });
  return idx;
}

int horizon_of(const AgentPath& path) {
  if (path.empty()) throw InvalidArgument("counterpart: empty path");
  return static_cast<int>(path.size()) - 1;
}

void check_input(const CounterpartInput& in) {
  if (in.objects.size() != in.initial.size())
    throw ShapeMismatch("counterpart: one initial belief per object required");
  const int V = in.grid.cells();
  for (std::size_t i = 0; i < in.objects.size(); ++i) {
    if (!in.objects[i] || in.objects[i]->cells != V)
      throw ShapeMismatch("counterpart: polytope cell count does not match the grid");
    if (in.initial[i].size() != V + 1) throw ShapeMismatch("counterpart: initial belief must have V + 1 slots");
  }
  horizon_of(in.path);
}

struct ColumnSolve {
  double value = 0.0;
  Vector m;
};

// max w . m - P s over the column polytope with output-row slack s >= 0.
ColumnSolve solve_column(const picnn::Embedding& emb, const Vector& w, const CounterpartOptions& opt,
                         int& lp_solves) {
  const Eigen::Index V = w.size();
  ColumnSolve out;
  out.m = Vector::Zero(V);
  if (w.maxCoeff() <= 0.0 && w.minCoeff() >= 0.0) return out;
  if (emb.a.rows() == 0) {
    for (Eigen::Index u = 0; u < V; ++u)
      if (w[u] > 0.0) {
        out.m[u] = 1.0;
        out.value += w[u];
      }
    return out;
  }
  const Eigen::Index nk = emb.num_vars();
  lp::Problem p(nk + 1, emb.a.rows(), 0);
  p.ineq_matrix.leftCols(nk) = emb.a;
  p.ineq_matrix(emb.output_row(), nk) = -1.0;
  p.ineq_rhs = emb.b;
  p.cost.head(V) = -w;
  p.cost[nk] = opt.slack_penalty;
  p.var_lower.head(V).setZero();
  p.var_upper.head(V).setOnes();
  p.var_lower[nk] = 0.0;
  const lp::Solution s = lp::solve(p, opt.lp);
  ++lp_solves;
  if (s.status != lp::Status::Optimal)
    throw NumericalFailure("counterpart: column LP returned " + lp::to_string(s.status));
  out.value = -s.objective;
  out.m = s.primal.head(V);
  return out;
}

struct FrozenSolve {
  double total = 0.0;
  std::vector<double> object_value;
  std::vector<Matrix> maximizers;
};

FrozenSolve solve_frozen_decomposed(const CounterpartInput& in, const std::vector<std::vector<Vector>>& frozen,
                                    const CounterpartOptions& opt, int& lp_solves) {
  const int V = in.grid.cells(), tau = horizon_of(in.path);
  std::vector<Vector> d(tau + 1);
  for (int t = 1; t <= tau; ++t) d[t] = detection_factor(in.grid, in.path[t]);
  FrozenSolve fs;
  for (std::size_t i = 0; i < in.objects.size(); ++i) {
    const ObjectPolytopes& poly = *in.objects[i];
    double value = -in.initial[i][0];
    double g = 1.0;
    Matrix w = Matrix::Zero(V, V);  // column v holds w_v
    for (int t = 1; t <= tau; ++t) {
      g *= in.grid.gamma;
      value -= g;
      for (int v = 0; v < V; ++v) w.col(v) += (g * d[t][v]) * frozen[i][t - 1];
    }
    Matrix mx = Matrix::Zero(V, V);
    for (int v = 0; v < V; ++v) {
      const ColumnSolve cs = solve_column(poly.columns[v], w.col(v), opt, lp_solves);
      value += cs.value;
      mx.col(v) = cs.m;
    }
    fs.total += value;
    fs.object_value.push_back(value);
    fs.maximizers.push_back(std::move(mx));
  }
  return fs;
}

FrozenSolve solve_frozen(const CounterpartInput& in, const std::vector<std::vector<Vector>>& frozen, Route route,
                         const CounterpartOptions& opt, int& lp_solves) {
  if (route == Route::Decomposed) return solve_frozen_decomposed(in, frozen, opt, lp_solves);
  const RobustCounterpart rc = build_dual_counterpart(in, frozen, opt);
  const CounterpartResult r = solve_dual_counterpart(rc, opt);
  lp_solves += r.lp_solves;
  return {r.value, r.object_value, r.maximizers};
}

}  // namespace

ObjectPolytopes make_polytopes(const conformal::ObjectUncertainty& set, const CounterpartOptions& options) {
  if (!set.picnn) throw InvalidArgument("uncertainty set has no score network");
  const int V = set.cells();
  if (set.picnn->input_dim != V) throw ShapeMismatch("uncertainty set: network input is not one column");
  ObjectPolytopes poly;
  poly.cells = V;
  poly.hi = Matrix::Ones(V, V);
  for (int v = 0; v < V; ++v) {
    if (set.q == kInf) {
      picnn::Embedding box;
      box.input_dim = V;
      box.a = Matrix::Zero(0, V);
      box.b = Vector::Zero(0);
      poly.columns.push_back(std::move(box));
      continue;
    }
    poly.columns.push_back(picnn::embed(*set.picnn, set.contexts[v], set.q));
    const picnn::Embedding& emb = poly.columns.back();
    lp::Problem p(emb.num_vars(), emb.a.rows(), 0);
    p.ineq_matrix = emb.a;
    p.ineq_rhs = emb.b;
    p.var_lower.head(V).setZero();
    p.var_upper.head(V).setOnes();
    for (int u = 0; u < V; ++u) {
      p.cost.setZero();
      p.cost[u] = -1.0;
      const lp::Solution s = lp::solve(p, options.lp);
      ++poly.lp_solves;
      if (s.status == lp::Status::Infeasible)
        throw EmptySet("uncertainty set column " + std::to_string(v) + " is empty");
      if (s.status != lp::Status::Optimal) throw NumericalFailure("counterpart: coordinate bound LP failed");
      poly.hi(u, v) = std::clamp(s.primal[u], 0.0, 1.0);
    }
  }
  for (int v = 0; v < V; ++v) poly.hi_order.push_back(order_by_decreasing(poly.hi.col(v)));
  return poly;
}

std::vector<Vector> belief_envelope(const GridSpec& grid, const AgentPath& path, const ObjectPolytopes& poly,
                                    const Vector& initial) {
  const int V = grid.cells(), tau = horizon_of(path);
  std::vector<Vector> out;
  if (tau == 0) return out;
  Vector beta = initial.tail(V);
  double mass = beta.sum();
  out.push_back(beta);
  for (int t = 1; t < tau; ++t) {
    const Vector d = detection_factor(grid, path[t]);
    const std::vector<int> by_d = order_by_decreasing(d);
    // Largest retained fraction of row u: a row-stochastic row under the caps hi(u, .).
    Vector keep(V);
    for (int u = 0; u < V; ++u) keep[u] = knapsack(by_d, [&](int v) { return d[v]; }, poly.hi.row(u).transpose(), 1.0);
    const double next_mass = std::min(mass, knapsack(order_by_decreasing(keep), keep, beta, mass));
    Vector next(V);
    for (int v = 0; v < V; ++v) {
      const double inflow = knapsack(poly.hi_order[v], poly.hi.col(v), beta, mass);
      next[v] = std::min({1.0, next_mass, d[v] * inflow});
    }
    beta = std::move(next);
    mass = next_mass;
    out.push_back(beta);
  }
  return out;
}

std::vector<Vector> linear_rollout(const GridSpec& grid, const AgentPath& path, const Matrix& m,
                                   const Vector& initial) {
  const int V = grid.cells(), tau = horizon_of(path);
  std::vector<Vector> seq;
  seq.push_back(initial.tail(V));
  for (int t = 1; t <= tau; ++t)
    seq.push_back(detection_factor(grid, path[t]).cwiseProduct(m.transpose() * seq.back()));
  return seq;
}

double linear_value(const GridSpec& grid, const AgentPath& path, const Matrix& m, const Vector& initial) {
  const auto seq = linear_rollout(grid, path, m, initial);
  double value = -initial[0], g = 1.0;
  for (std::size_t t = 1; t < seq.size(); ++t) {
    g *= grid.gamma;
    value -= g * (1.0 - seq[t].sum());
  }
  return value;
}

double adversarial_value(const GridSpec& grid, const AgentPath& path, const Matrix& m, const Vector& initial) {
  const auto seq = rollout(grid, path, m, initial);
  double value = 0.0, g = 1.0;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    value -= g * seq[t][0];
    g *= grid.gamma;
  }
  return value;
}

RobustCounterpart build_dual_counterpart(const CounterpartInput& in, const std::vector<std::vector<Vector>>& frozen,
                                         const CounterpartOptions& opt) {
  check_input(in);
  const int V = in.grid.cells(), tau = horizon_of(in.path);
  if (frozen.size() != in.objects.size()) throw ShapeMismatch("counterpart: frozen beliefs per object required");
  for (const auto& f : frozen) {
    if (static_cast<int>(f.size()) != tau) throw ShapeMismatch("counterpart: frozen beliefs need tau entries");
    for (const auto& b : f)
      if (b.size() != V) throw ShapeMismatch("counterpart: frozen belief must have V cells");
  }

  RobustCounterpart rc;
  rc.grid = in.grid;
  rc.path = in.path;
  rc.cells = V;
  rc.horizon = tau;
  rc.s = Matrix::Zero(V, V + 1);
  rc.s.rightCols(V) = Matrix::Identity(V, V);
  rc.e_row = Matrix::Ones(1, V + 1);
  rc.gamma_pow.resize(tau + 1);
  rc.gamma_pow[0] = 1.0;
  for (int t = 1; t <= tau; ++t) rc.gamma_pow[t] = rc.gamma_pow[t - 1] * in.grid.gamma;
  for (int t = 1; t <= tau; ++t) rc.d.push_back(detection_factor(in.grid, in.path[t]).asDiagonal());
  rc.frozen = frozen;

  // Layout.
  int nvar = 0, nineq = 0, neq = 0;
  for (const ObjectPolytopes* poly : in.objects) {
    RobustCounterpart::ObjectLayout lay;
    lay.pi = {nvar, tau * V};
    nvar += tau * V;
    lay.nu = {nvar, tau * V};
    nvar += tau * V;
    lay.lambda = {nvar, tau + 1};
    nvar += tau + 1;
    lay.mu = {nvar, V + 1};
    nvar += V + 1;
    for (int v = 0; v < V; ++v) {
      const picnn::Embedding& emb = poly->columns[v];
      const int rows = static_cast<int>(emb.a.rows()) + V;
      lay.xi.push_back({nvar, rows});
      nvar += rows;
      lay.k_row.push_back(nineq);
      lay.k_size.push_back(static_cast<int>(emb.num_vars()));
      nineq += static_cast<int>(emb.num_vars());
    }
    nineq += tau * V + tau * V + V;  // alpha rows, beta cells t >= 1, beta^0 cells
    neq += tau + 1;
    rc.layout.push_back(std::move(lay));
  }

  lp::Problem& p = rc.dual;
  p = lp::Problem(nvar, nineq, neq);
  int row = 0, erow = 0;
  for (std::size_t i = 0; i < in.objects.size(); ++i) {
    const ObjectPolytopes& poly = *in.objects[i];
    const auto& lay = rc.layout[i];
    const Vector& c = in.initial[i];
    // k^v rows: sum_t pi^t_v (C beta_hat^{t-1})_j - (A_v^T xi^v)_j <= 0.
    for (int v = 0; v < V; ++v) {
      const picnn::Embedding& emb = poly.columns[v];
      const int nk = lay.k_size[v];
      Matrix c_mat = Matrix::Zero(nk, V + 1);  // C = H^T S
      c_mat.topRows(V) = rc.s;
      for (int t = 1; t <= tau; ++t) {
        Vector full(V + 1);
        full << 0.0, frozen[i][t - 1];
        const Vector cb = c_mat * full;
        for (int j = 0; j < nk; ++j) p.ineq_matrix(row + j, lay.pi.offset + (t - 1) * V + v) = cb[j];
      }
      const int er = static_cast<int>(emb.a.rows());
      const int x0 = lay.xi[v].offset;
      for (int r = 0; r < er; ++r)
        for (int j = 0; j < nk; ++j) p.ineq_matrix(row + j, x0 + r) = -emb.a(r, j);
      for (int u = 0; u < V; ++u) p.ineq_matrix(row + u, x0 + er + u) = -1.0;
      row += nk;
      // xi >= 0, output row capped by the slack penalty, objective b_v . xi^v.
      for (int r = 0; r < er + V; ++r) {
        p.var_lower[x0 + r] = 0.0;
        p.cost[x0 + r] = r < er ? emb.b[r] : 1.0;
      }
      if (er > 0) p.var_upper[x0 + er - 1] = opt.slack_penalty;
    }
    // alpha^t rows: d^t_v nu^t_v - pi^t_v <= 0.
    for (int t = 1; t <= tau; ++t)
      for (int v = 0; v < V; ++v) {
        p.ineq_matrix(row, lay.nu.offset + (t - 1) * V + v) = rc.d[t - 1](v, v);
        p.ineq_matrix(row, lay.pi.offset + (t - 1) * V + v) = -1.0;
        ++row;
      }
    // beta^t rows, t >= 1.
    for (int t = 1; t <= tau; ++t) {
      for (int v = 0; v < V; ++v) {
        p.ineq_matrix(row, lay.lambda.offset + t) = -1.0;
        p.ineq_matrix(row, lay.nu.offset + (t - 1) * V + v) = -1.0;
        ++row;
      }
      p.eq_matrix(erow, lay.lambda.offset + t) = 1.0;
      p.eq_rhs[erow] = -rc.gamma_pow[t];
      ++erow;
    }
    // beta^0 rows.
    for (int v = 0; v < V; ++v) {
      p.ineq_matrix(row, lay.lambda.offset) = -1.0;
      p.ineq_matrix(row, lay.mu.offset + 1 + v) = -1.0;
      ++row;
    }
    p.eq_matrix(erow, lay.lambda.offset) = 1.0;
    p.eq_matrix(erow, lay.mu.offset) = 1.0;
    p.eq_rhs[erow] = -rc.gamma_pow[0];
    ++erow;
    for (int t = 0; t <= tau; ++t) p.cost[lay.lambda.offset + t] = 1.0;
    for (int s = 0; s <= V; ++s) p.cost[lay.mu.offset + s] = c[s];
  }
  return rc;
}

CounterpartResult solve_dual_counterpart(const RobustCounterpart& rc, const CounterpartOptions& options) {
  const lp::Solution s = lp::solve(rc.dual, options.lp);
  if (s.status != lp::Status::Optimal)
    throw NumericalFailure("counterpart: dual LP returned " + lp::to_string(s.status));
  CounterpartResult r;
  r.lp_solves = 1;
  r.value = s.objective;
  r.certified_bound = s.objective;
  const int V = rc.cells;
  for (std::size_t i = 0; i < rc.layout.size(); ++i) {
    const auto& lay = rc.layout[i];
    const int begin = lay.pi.offset;
    const int end = lay.xi.back().offset + lay.xi.back().size;
    r.object_value.push_back(rc.dual.cost.segment(begin, end - begin).dot(s.primal.segment(begin, end - begin)));
    Matrix mx(V, V);
    for (int v = 0; v < V; ++v) mx.col(v) = s.dual_ineq.segment(lay.k_row[v], V);
    r.maximizers.push_back(std::move(mx));
  }
  return r;
}

CounterpartResult solve_counterpart(const CounterpartInput& in, Method method, Route route,
                                    const CounterpartOptions& options) {
  check_input(in);
  CounterpartResult r;
  std::vector<std::vector<Vector>> frozen;
  for (std::size_t i = 0; i < in.objects.size(); ++i)
    frozen.push_back(belief_envelope(in.grid, in.path, *in.objects[i], in.initial[i]));
  FrozenSolve fs = solve_frozen(in, frozen, route, options, r.lp_solves);
  r.certified_bound = fs.total;
  r.rounds = 1;
  if (method == Method::Alternating) {
    r.certified = false;
    r.converged = false;
    double prev = fs.total;
    while (r.rounds < options.max_rounds) {
      for (std::size_t i = 0; i < in.objects.size(); ++i) {
        auto seq = linear_rollout(in.grid, in.path, fs.maximizers[i], in.initial[i]);
        seq.pop_back();
        frozen[i] = std::move(seq);
      }
      fs = solve_frozen(in, frozen, route, options, r.lp_solves);
      ++r.rounds;
      if (std::abs(fs.total - prev) < options.round_tol) {
        r.converged = true;
        break;
      }
      prev = fs.total;
    }
  }
  r.value = fs.total;
  r.object_value = std::move(fs.object_value);
  r.maximizers = std::move(fs.maximizers);
  return r;
}

}  // namespace robustnav::robust
