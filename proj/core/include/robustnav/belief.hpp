#pragma once

#include <iosfwd>
#include <vector>

#include "robustnav/common.hpp"

namespace robustnav {

using Point = Eigen::Vector2d;
using AgentPath = std::vector<Point>;

/// Square grid of E x E unit cells over [0, E]^2; cell v has center
/// ((v mod E) + 0.5, floor(v / E) + 0.5).
struct GridSpec {
  int edge = 3;
  double gamma = 0.9;
  int horizon = 2;
  double max_step = 1.0;

  int cells() const { return edge * edge; }
  Point center(int v) const { return {(v % edge) + 0.5, (v / edge) + 0.5}; }
  Point start() const { return {edge / 2.0, edge / 2.0}; }
  /// Cell containing p; points on the far edge belong to the last cell.
  int cell_of(const Point& p) const;
  /// Throws InvalidArgument.
  void validate() const;
};

/// Throws InvalidArgument unless the path starts at `start`, stays inside
/// [0, E]^2 and no step exceeds max_step (1e-9 slack for rounding).
void validate_path(const GridSpec& grid, const AgentPath& path, const Point& start);
inline void validate_path(const GridSpec& grid, const AgentPath& path) {
  validate_path(grid, path, grid.start());
}

/// Throws InvalidArgument unless M is V x V with entries in [0, 1] and unit row sums (1e-9).
void check_transition(const Matrix& m, int cells);

/// Prior belief (V + 1 slots, slot 0 = capture): slots 0 and floor(V/2) + 1 are
/// zero, the remaining V - 1 slots share mass uniformly.
Vector initial_belief(const GridSpec& grid);

/// d(p)_v = (|v_x - p_x| + |v_y - p_y|) / (V - 1).
Vector detection_factor(const GridSpec& grid, const Point& p);

/// alpha_v = sum_u M_uv beta_u over the cell slots u (slot 0 excluded).
/// Throws DimensionMismatch.
Vector propagate(const Vector& prior, const Matrix& m);

/// beta_v = alpha_v d_v; slot 0 accumulates the removed mass,
/// prev_capture + sum_v alpha_v (1 - d_v), which equals 1 - sum_v beta_v whenever
/// alpha carries the non-captured mass 1 - prev_capture. Throws NegativeBelief
/// below -1e-12 and DimensionMismatch.
Vector detect_update(const Vector& posterior, const Vector& d, double prev_capture);

/// beta^0 .. beta^tau for one object: propagate, then detect at p_t, for t >= 1.
std::vector<Vector> rollout(const GridSpec& grid, const AgentPath& path, const Matrix& m,
                            const Vector& initial);
inline std::vector<Vector> rollout(const GridSpec& grid, const AgentPath& path, const Matrix& m) {
  return rollout(grid, path, m, initial_belief(grid));
}

using BeliefSequence = std::vector<Vector>;

/// One sequence per object.
std::vector<BeliefSequence> rollout_beliefs(const GridSpec& grid, const AgentPath& path,
                                            const std::vector<Matrix>& ms);

/// Columns: t,object,slot,value.
void write_belief_csv(std::ostream& out, const std::vector<BeliefSequence>& beliefs);

}  // namespace robustnav
