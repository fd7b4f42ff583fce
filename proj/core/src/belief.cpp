#include "robustnav/belief.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>

namespace robustnav {

int GridSpec::cell_of(const Point& p) const {
  const int cx = std::clamp(static_cast<int>(std::floor(p.x())), 0, edge - 1);
  const int cy = std::clamp(static_cast<int>(std::floor(p.y())), 0, edge - 1);
  return cy * edge + cx;
}

void GridSpec::validate() const {
  if (edge < 2) throw InvalidArgument("grid: edge must be >= 2");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("grid: gamma must lie in (0, 1]");
  if (horizon < 0) throw InvalidArgument("grid: horizon must be >= 0");
  if (!(max_step > 0.0)) throw InvalidArgument("grid: max_step must be positive");
}

void validate_path(const GridSpec& grid, const AgentPath& path, const Point& start) {
  if (path.empty()) throw InvalidArgument("path: empty");
  if ((path.front() - start).norm() > 1e-12) throw InvalidArgument("path: does not begin at the start point");
  const double e = grid.edge;
  for (std::size_t t = 0; t < path.size(); ++t) {
    const Point& p = path[t];
    if (p.x() < 0.0 || p.y() < 0.0 || p.x() > e || p.y() > e)
      throw InvalidArgument("path: position " + std::to_string(t) + " leaves the grid");
    if (t > 0 && (p - path[t - 1]).norm() > grid.max_step + 1e-9)
      throw InvalidArgument("path: step " + std::to_string(t) + " exceeds max_step");
  }
}

void check_transition(const Matrix& m, int cells) {
  if (m.rows() != cells || m.cols() != cells)
    throw InvalidArgument("transition matrix must be " + std::to_string(cells) + "x" + std::to_string(cells));
  if (m.minCoeff() < 0.0 || m.maxCoeff() > 1.0) throw InvalidArgument("transition entries must lie in [0, 1]");
  for (int u = 0; u < cells; ++u)
    if (std::abs(m.row(u).sum() - 1.0) > 1e-9)
      throw InvalidArgument("transition row " + std::to_string(u) + " does not sum to 1");
}

Vector initial_belief(const GridSpec& grid) {
  const int V = grid.cells();
  if (V < 2) throw InvalidArgument("initial_belief: grid needs at least 2 cells");
  Vector beta = Vector::Constant(V + 1, 1.0 / (V - 1));
  beta[0] = 0.0;
  beta[V / 2 + 1] = 0.0;
  return beta;
}

Vector detection_factor(const GridSpec& grid, const Point& p) {
  const int V = grid.cells();
  Vector d(V);
  for (int v = 0; v < V; ++v) {
    const Point c = grid.center(v);
    d[v] = (std::abs(c.x() - p.x()) + std::abs(c.y() - p.y())) / (V - 1);
  }
  return d;
}

Vector propagate(const Vector& prior, const Matrix& m) {
  const Eigen::Index V = prior.size() - 1;
  if (V < 1 || m.rows() != V || m.cols() != V)
    throw DimensionMismatch("propagate: belief has " + std::to_string(prior.size()) + " slots, matrix is " +
                            std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  return m.transpose() * prior.tail(V);
}

Vector detect_update(const Vector& posterior, const Vector& d, double prev_capture) {
  const Eigen::Index V = posterior.size();
  if (d.size() != V) throw DimensionMismatch("detect_update: detection factor length mismatch");
  Vector beta(V + 1);
  double removed = 0.0;
  for (Eigen::Index v = 0; v < V; ++v) {
    const double b = posterior[v] * d[v];
    if (b < -1e-12) throw NegativeBelief("detect_update: negative belief at cell " + std::to_string(v));
    beta[v + 1] = b;
    removed += posterior[v] - b;
  }
  beta[0] = prev_capture + removed;
  return beta;
}

std::vector<Vector> rollout(const GridSpec& grid, const AgentPath& path, const Matrix& m,
                            const Vector& initial) {
  std::vector<Vector> seq;
  seq.reserve(path.size());
  seq.push_back(initial);
  for (std::size_t t = 1; t < path.size(); ++t) {
    const Vector alpha = propagate(seq.back(), m);
    seq.push_back(detect_update(alpha, detection_factor(grid, path[t]), seq.back()[0]));
  }
  return seq;
}

std::vector<BeliefSequence> rollout_beliefs(const GridSpec& grid, const AgentPath& path,
                                            const std::vector<Matrix>& ms) {
  validate_path(grid, path);
  std::vector<BeliefSequence> out;
  out.reserve(ms.size());
  for (const Matrix& m : ms) out.push_back(rollout(grid, path, m));
  return out;
}

void write_belief_csv(std::ostream& out, const std::vector<BeliefSequence>& beliefs) {
  out << "t,object,slot,value\n";
  char buf[64];
  for (std::size_t i = 0; i < beliefs.size(); ++i)
    for (std::size_t t = 0; t < beliefs[i].size(); ++t)
      for (Eigen::Index s = 0; s < beliefs[i][t].size(); ++s) {
        std::snprintf(buf, sizeof buf, "%.17g", beliefs[i][t][s]);
        out << t << ',' << i << ',' << s << ',' << buf << '\n';
      }
}

}  // namespace robustnav
