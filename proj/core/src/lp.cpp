#include "robustnav/lp.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <vector>

namespace robustnav::lp {

std::string to_string(Status status) {
  switch (status) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
  }
  return "unknown";
}

Problem::Problem(Eigen::Index vars, Eigen::Index ineq_rows, Eigen::Index eq_rows)
    : cost(Vector::Zero(vars)),
      ineq_matrix(Matrix::Zero(ineq_rows, vars)),
      ineq_rhs(Vector::Zero(ineq_rows)),
      eq_matrix(Matrix::Zero(eq_rows, vars)),
      eq_rhs(Vector::Zero(eq_rows)),
      var_lower(Vector::Constant(vars, -kInf)),
      var_upper(Vector::Constant(vars, kInf)) {}

void Problem::validate() const {
  const auto n = num_vars();
  if (ineq_matrix.rows() != ineq_rhs.size() || (ineq_matrix.rows() > 0 && ineq_matrix.cols() != n))
    throw ShapeMismatch("lp: inequality block shape does not match cost/rhs");
  if (eq_matrix.rows() != eq_rhs.size() || (eq_matrix.rows() > 0 && eq_matrix.cols() != n))
    throw ShapeMismatch("lp: equality block shape does not match cost/rhs");
  if (var_lower.size() != 0 && var_lower.size() != n)
    throw ShapeMismatch("lp: lower bound length does not match cost");
  if (var_upper.size() != 0 && var_upper.size() != n)
    throw ShapeMismatch("lp: upper bound length does not match cost");
  if (!cost.allFinite() || !ineq_matrix.allFinite() || !ineq_rhs.allFinite() ||
      !eq_matrix.allFinite() || !eq_rhs.allFinite())
    throw InvalidArgument("lp: non-finite coefficient");
  for (Eigen::Index j = 0; j < n; ++j) {
    const double lo = lower(j), up = upper(j);
    if (std::isnan(lo) || std::isnan(up) || lo == kInf || up == -kInf)
      throw InvalidArgument("lp: invalid bound on variable " + std::to_string(j));
    if (lo > up) throw InvalidArgument("lp: lower bound exceeds upper bound on variable " + std::to_string(j));
  }
}

namespace {

enum class VarState : unsigned char { Basic, AtLower, AtUpper, FreeZero };

struct Outcome {
  Status status = Status::Optimal;
  bool ok = true;  // false: verification failed, caller escalates
};

class Simplex {
 public:
  Simplex(const Problem& p, const Options& opt) : p_(p), opt_(opt) {
    n_ = p.num_vars();
    mi_ = p.num_ineq();
    me_ = p.num_eq();
    m_ = mi_ + me_;
  }

  Solution run() {
    Solution sol;
    build_phase1();
    const Status s1 = iterate(/*phase1=*/true);
    (void)s1;
    const double infeas = phase1_objective();
    const double scale = 1.0 + (m_ ? b_.cwiseAbs().maxCoeff() : 0.0);
    if (infeas > opt_.feasibility_tol * scale) {
      sol.status = Status::Infeasible;
      sol.certificate = -duals();
      sol.iterations = iterations_;
      sol.primal = x_.head(n_);
      return sol;
    }
    start_phase2();
    Status s2 = iterate(/*phase1=*/false);
    if (s2 == Status::Unbounded) {
      sol.status = Status::Unbounded;
      sol.certificate = ray_;
      sol.iterations = iterations_;
      sol.primal = x_.head(n_);
      sol.objective = -kInf;
      return sol;
    }
    // Final verification from a fresh factorisation; resume if it reveals drift.
    for (int round = 0; round < 3; ++round) {
      refactor();
      if (primal_ok() && dual_ok()) break;
      if (round == 2) throw NumericalFailure("lp: final basis fails verification");
      s2 = iterate(false);
      if (s2 == Status::Unbounded) {
        sol.status = Status::Unbounded;
        sol.certificate = ray_;
        sol.iterations = iterations_;
        sol.primal = x_.head(n_);
        sol.objective = -kInf;
        return sol;
      }
    }
    sol.status = Status::Optimal;
    sol.iterations = iterations_;
    sol.primal = x_.head(n_);
    // Snap values within tolerance onto their bounds.
    for (Eigen::Index j = 0; j < n_; ++j) {
      const double lo = lo_[j], up = up_[j];
      if (sol.primal[j] < lo) sol.primal[j] = lo;
      if (sol.primal[j] > up) sol.primal[j] = up;
    }
    const Vector y = duals();
    sol.dual_ineq = -y.head(mi_);
    sol.dual_eq = -y.tail(me_);
    sol.reduced_cost.resize(n_);
    for (Eigen::Index j = 0; j < n_; ++j) sol.reduced_cost[j] = c_[j] - y.dot(a_.col(j));
    sol.objective = p_.cost.dot(sol.primal);
    sol.dual_objective = dual_objective(p_, sol.dual_ineq, sol.dual_eq);
    sol.degenerate = degenerate(y);
    return sol;
  }

 private:
  // ---- setup ---------------------------------------------------------------

  void build_phase1() {
    // Columns: structural [0,n), slacks [n, n+mi), artificials appended.
    a_.setZero(m_, n_ + mi_ + m_);
    if (mi_) a_.block(0, 0, mi_, n_) = p_.ineq_matrix;
    if (me_) a_.block(mi_, 0, me_, n_) = p_.eq_matrix;
    for (Eigen::Index i = 0; i < mi_; ++i) a_(i, n_ + i) = 1.0;
    b_.resize(m_);
    if (mi_) b_.head(mi_) = p_.ineq_rhs;
    if (me_) b_.tail(me_) = p_.eq_rhs;

    total_ = n_ + mi_;
    lo_.resize(n_ + mi_ + m_);
    up_.resize(n_ + mi_ + m_);
    for (Eigen::Index j = 0; j < n_; ++j) {
      lo_[j] = p_.lower(j);
      up_[j] = p_.upper(j);
    }
    for (Eigen::Index i = 0; i < mi_; ++i) {
      lo_[n_ + i] = 0.0;
      up_[n_ + i] = kInf;
    }
    x_.setZero(n_ + mi_ + m_);
    state_.assign(n_ + mi_ + m_, VarState::AtLower);
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (std::isfinite(lo_[j])) {
        x_[j] = lo_[j];
        state_[j] = VarState::AtLower;
      } else if (std::isfinite(up_[j])) {
        x_[j] = up_[j];
        state_[j] = VarState::AtUpper;
      } else {
        x_[j] = 0.0;
        state_[j] = VarState::FreeZero;
      }
    }
    Vector resid = b_;
    if (n_) resid -= a_.leftCols(n_) * x_.head(n_);
    basis_.assign(m_, -1);
    num_art_ = 0;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (i < mi_ && resid[i] >= 0.0) {
        basis_[i] = static_cast<int>(n_ + i);
        state_[n_ + i] = VarState::Basic;
        x_[n_ + i] = resid[i];
        continue;
      }
      if (i < mi_) {
        x_[n_ + i] = 0.0;
        state_[n_ + i] = VarState::AtLower;
      }
      const Eigen::Index col = n_ + mi_ + num_art_;
      a_(i, col) = resid[i] >= 0.0 ? 1.0 : -1.0;
      lo_[col] = 0.0;
      up_[col] = kInf;
      x_[col] = std::abs(resid[i]);
      state_[col] = VarState::Basic;
      basis_[i] = static_cast<int>(col);
      ++num_art_;
    }
    total_ = n_ + mi_ + num_art_;
    c_.setZero(total_);
    for (Eigen::Index k = n_ + mi_; k < total_; ++k) c_[k] = 1.0;
    refactor();
  }

  void start_phase2() {
    for (Eigen::Index k = n_ + mi_; k < total_; ++k) {
      up_[k] = 0.0;
      if (state_[k] != VarState::Basic) {
        state_[k] = VarState::AtLower;
        x_[k] = 0.0;
      }
    }
    c_.setZero(total_);
    c_.head(n_) = p_.cost;
    cost_scale_ = 1.0 + (n_ ? p_.cost.cwiseAbs().maxCoeff() : 0.0);
    degenerate_run_ = 0;
    refactor();
  }

  double phase1_objective() const {
    double s = 0.0;
    for (Eigen::Index k = n_ + mi_; k < total_; ++k) s += x_[k];
    return s;
  }

  // ---- linear algebra ------------------------------------------------------

  void refactor() {
    if (m_ == 0) {
      since_refactor_ = 0;
      return;
    }
    Matrix bm(m_, m_);
    for (Eigen::Index i = 0; i < m_; ++i) bm.col(i) = a_.col(basis_[i]);
    Eigen::PartialPivLU<Matrix> lu(bm);
    binv_ = lu.inverse();
    const double err = (bm * binv_ - Matrix::Identity(m_, m_)).cwiseAbs().maxCoeff();
    if (!binv_.allFinite() || err > 1e-6) throw NumericalFailure("lp: singular basis");
    since_refactor_ = 0;
    // Recompute basic values from nonbasic ones.
    Vector rhs = b_;
    for (Eigen::Index j = 0; j < total_; ++j)
      if (state_[j] != VarState::Basic && x_[j] != 0.0) rhs -= a_.col(j) * x_[j];
    const Vector xb = binv_ * rhs;
    for (Eigen::Index i = 0; i < m_; ++i) x_[basis_[i]] = xb[i];
  }

  Vector duals() const {
    Vector cb(m_);
    for (Eigen::Index i = 0; i < m_; ++i) cb[i] = c_[basis_[i]];
    return binv_.transpose() * cb;
  }

  // ---- iteration -----------------------------------------------------------

  Status iterate(bool phase1) {
    const double opt_tol = opt_.optimality_tol * (phase1 ? 1.0 : cost_scale_);
    const int limit = opt_.max_iterations > 0 ? opt_.max_iterations
                                              : static_cast<int>(100 * (m_ + total_) + 1000);
    const long degenerate_limit = 2 * (m_ + total_);
    while (true) {
      if (iterations_ >= limit) throw NumericalFailure("lp: iteration limit reached");
      if (since_refactor_ >= opt_.refactor_interval) refactor();
      const Vector y = duals();

      // Pricing.
      Eigen::Index enter = -1;
      double best = 0.0, d_enter = 0.0;
      for (Eigen::Index j = 0; j < total_; ++j) {
        const VarState st = state_[j];
        if (st == VarState::Basic) continue;
        if (lo_[j] == up_[j]) continue;
        const double d = c_[j] - y.dot(a_.col(j));
        bool eligible = false;
        if (st == VarState::AtLower) eligible = d < -opt_tol;
        else if (st == VarState::AtUpper) eligible = d > opt_tol;
        else eligible = std::abs(d) > opt_tol;
        if (!eligible) continue;
        if (bland_) {
          enter = j;
          d_enter = d;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          enter = j;
          d_enter = d;
        }
      }
      if (enter < 0) return Status::Optimal;

      const double dir = d_enter < 0.0 ? 1.0 : -1.0;
      const Vector alpha = m_ ? Vector(binv_ * a_.col(enter)) : Vector();

      // Ratio test; the entering bound flip competes with the basic rows.
      double theta = kInf;
      Eigen::Index leave_row = -1;
      int leave_var = std::numeric_limits<int>::max();
      if (std::isfinite(lo_[enter]) && std::isfinite(up_[enter])) theta = up_[enter] - lo_[enter];
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double rate = -dir * alpha[i];
        const int k = basis_[i];
        double lim = kInf;
        if (rate < -opt_.pivot_tol && std::isfinite(lo_[k])) lim = (x_[k] - lo_[k]) / (-rate);
        else if (rate > opt_.pivot_tol && std::isfinite(up_[k])) lim = (up_[k] - x_[k]) / rate;
        else continue;
        lim = std::max(lim, 0.0);
        if (!std::isfinite(theta)) {
          theta = lim;
          leave_row = i;
          leave_var = k;
          continue;
        }
        const double tie = 1e-12 * (1.0 + theta);
        const bool better = lim < theta - tie;
        // Ties: a blocking row beats the entering bound flip, then lowest variable index.
        const bool tied = lim <= theta + tie && (leave_row < 0 || k < leave_var);
        if (better || tied) {
          theta = std::min(theta, lim);
          leave_row = i;
          leave_var = k;
        }
      }

      if (!std::isfinite(theta)) {
        if (phase1) throw NumericalFailure("lp: unbounded phase-one direction");
        ray_ = Vector::Zero(n_);
        if (enter < n_) ray_[enter] = dir;
        for (Eigen::Index i = 0; i < m_; ++i)
          if (basis_[i] < n_) ray_[basis_[i]] = -dir * alpha[i];
        return Status::Unbounded;
      }

      ++iterations_;
      if (theta <= 1e-12) {
        if (++degenerate_run_ > degenerate_limit) bland_ = true;
      } else {
        degenerate_run_ = 0;
      }

      // Move.
      x_[enter] += dir * theta;
      for (Eigen::Index i = 0; i < m_; ++i) x_[basis_[i]] -= dir * theta * alpha[i];

      if (leave_row < 0) {
        // Bound flip.
        if (dir > 0) {
          state_[enter] = VarState::AtUpper;
          x_[enter] = up_[enter];
        } else {
          state_[enter] = VarState::AtLower;
          x_[enter] = lo_[enter];
        }
        continue;
      }

      const int k = basis_[leave_row];
      const double rate = -dir * alpha[leave_row];
      if (rate < 0) {
        state_[k] = VarState::AtLower;
        x_[k] = lo_[k];
      } else {
        state_[k] = VarState::AtUpper;
        x_[k] = up_[k];
      }
      basis_[leave_row] = static_cast<int>(enter);
      state_[enter] = VarState::Basic;

      // Product-form update of the inverse.
      const double piv = alpha[leave_row];
      if (std::abs(piv) < opt_.pivot_tol) throw NumericalFailure("lp: pivot below tolerance");
      binv_.row(leave_row) /= piv;
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (i == leave_row || alpha[i] == 0.0) continue;
        binv_.row(i) -= alpha[i] * binv_.row(leave_row);
      }
      ++since_refactor_;
    }
  }

  // ---- verification --------------------------------------------------------

  bool primal_ok() const {
    const double tol = opt_.feasibility_tol * (1.0 + (m_ ? b_.cwiseAbs().maxCoeff() : 0.0));
    for (Eigen::Index j = 0; j < total_; ++j) {
      if (x_[j] < lo_[j] - tol || x_[j] > up_[j] + tol) return false;
    }
    if (m_) {
      const Vector r = a_.leftCols(total_) * x_.head(total_) - b_;
      if (r.cwiseAbs().maxCoeff() > tol) return false;
    }
    return true;
  }

  bool dual_ok() const {
    const double opt_tol = opt_.optimality_tol * cost_scale_ * 10.0;
    const Vector y = duals();
    for (Eigen::Index j = 0; j < total_; ++j) {
      if (state_[j] == VarState::Basic || lo_[j] == up_[j]) continue;
      const double d = c_[j] - y.dot(a_.col(j));
      if (state_[j] == VarState::AtLower && d < -opt_tol) return false;
      if (state_[j] == VarState::AtUpper && d > opt_tol) return false;
      if (state_[j] == VarState::FreeZero && std::abs(d) > opt_tol) return false;
    }
    return true;
  }

  bool degenerate(const Vector& y) const {
    const double ptol = opt_.feasibility_tol;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const int k = basis_[i];
      if (k >= n_ + mi_) return true;  // artificial left in the basis at zero
      if (std::abs(x_[k] - lo_[k]) <= ptol || std::abs(x_[k] - up_[k]) <= ptol) return true;
    }
    const double dtol = opt_.optimality_tol * cost_scale_ * 10.0;
    for (Eigen::Index j = 0; j < n_ + mi_; ++j) {
      if (state_[j] == VarState::Basic || lo_[j] == up_[j]) continue;
      if (std::abs(c_[j] - y.dot(a_.col(j))) <= dtol) return true;
    }
    return false;
  }

  const Problem& p_;
  Options opt_;
  Eigen::Index n_ = 0, mi_ = 0, me_ = 0, m_ = 0, total_ = 0, num_art_ = 0;
  Matrix a_;
  Vector b_, c_, lo_, up_, x_;
  std::vector<VarState> state_;
  std::vector<int> basis_;
  Matrix binv_;
  Vector ray_;
  double cost_scale_ = 1.0;
  int iterations_ = 0;
  int since_refactor_ = 0;
  long degenerate_run_ = 0;
  bool bland_ = false;
};

}  // namespace

Solution solve(const Problem& problem, const Options& options) {
  problem.validate();
  try {
    return Simplex(problem, options).run();
  } catch (const NumericalFailure&) {
    Options retry = options;
    retry.pivot_tol = std::max(options.pivot_tol * 100.0, 1e-7);
    retry.refactor_interval = 1;
    return Simplex(problem, retry).run();
  }
}

double dual_objective(const Problem& problem, const Vector& dual_ineq, const Vector& dual_eq) {
  const auto n = problem.num_vars();
  Vector r = problem.cost;
  double value = 0.0;
  if (problem.num_ineq()) {
    r += problem.ineq_matrix.transpose() * dual_ineq;
    value -= problem.ineq_rhs.dot(dual_ineq);
  }
  if (problem.num_eq()) {
    r += problem.eq_matrix.transpose() * dual_eq;
    value -= problem.eq_rhs.dot(dual_eq);
  }
  const double tol = 1e-9 * (1.0 + (n ? problem.cost.cwiseAbs().maxCoeff() : 0.0));
  for (Eigen::Index j = 0; j < n; ++j) {
    const double lo = problem.lower(j), up = problem.upper(j);
    if (r[j] > 0.0) {
      if (std::isfinite(lo)) value += lo * r[j];
      else if (r[j] > tol) return -kInf;
    } else if (r[j] < 0.0) {
      if (std::isfinite(up)) value += up * r[j];
      else if (-r[j] > tol) return -kInf;
    }
  }
  return value;
}

double duality_gap(const Solution& solution, const Problem& problem) {
  return std::abs(problem.cost.dot(solution.primal) -
                  dual_objective(problem, solution.dual_ineq, solution.dual_eq));
}

Residuals residuals(const Solution& solution, const Problem& problem) {
  Residuals res;
  const Vector& x = solution.primal;
  if (problem.num_ineq()) {
    const Vector slack = problem.ineq_rhs - problem.ineq_matrix * x;
    res.primal = std::max(res.primal, (-slack).maxCoeff());
    if (solution.dual_ineq.size()) {
      res.dual_sign = std::max(0.0, (-solution.dual_ineq).maxCoeff());
      res.complementarity = solution.dual_ineq.cwiseProduct(slack).cwiseAbs().maxCoeff();
    }
  }
  if (problem.num_eq())
    res.primal = std::max(res.primal, (problem.eq_matrix * x - problem.eq_rhs).cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < problem.num_vars(); ++j) {
    res.primal = std::max(res.primal, problem.lower(j) - x[j]);
    res.primal = std::max(res.primal, x[j] - problem.upper(j));
  }
  return res;
}

namespace {
std::string num(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_row(std::ostream& out, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  bool any = false;
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    if (row[j] == 0.0) continue;
    out << (row[j] < 0 ? " - " : (any ? " + " : " ")) << num(std::abs(row[j])) << " x" << j;
    any = true;
  }
  if (!any) out << " 0";
}
}  // namespace

void dump(const Problem& problem, std::ostream& out) {
  out << "vars " << problem.num_vars() << " ineq " << problem.num_ineq() << " eq " << problem.num_eq()
      << "\n";
  out << "minimize:";
  write_row(out, problem.cost.transpose());
  out << "\n";
  for (Eigen::Index i = 0; i < problem.num_ineq(); ++i) {
    out << "c" << i << ":";
    write_row(out, problem.ineq_matrix.row(i));
    out << " <= " << num(problem.ineq_rhs[i]) << "\n";
  }
  for (Eigen::Index i = 0; i < problem.num_eq(); ++i) {
    out << "e" << i << ":";
    write_row(out, problem.eq_matrix.row(i));
    out << " = " << num(problem.eq_rhs[i]) << "\n";
  }
  for (Eigen::Index j = 0; j < problem.num_vars(); ++j) {
    out << "x" << j << " in [" << num(problem.lower(j)) << ", " << num(problem.upper(j)) << "]\n";
  }
}

}  // namespace robustnav::lp
