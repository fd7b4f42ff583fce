#pragma once

#include <vector>

#include "robustnav/belief.hpp"

namespace robustnav {

/// Unit-cost 4-connected BFS distances from `from`; blocked cells (optional,
/// size V) are impassable and unreachable cells get -1.
std::vector<int> bfs_distances(const GridSpec& grid, int from, const std::vector<bool>& blocked = {});

/// Shortest walk from `start` visiting `targets`, in the listed order when
/// `ordered`, else in the best order. Throws InvalidArgument if a target is
/// unreachable or more than 8 targets are unordered.
int shortest_tour(const GridSpec& grid, int start, const std::vector<int>& targets, bool ordered,
                  const std::vector<bool>& blocked = {});

struct Metrics {
  bool success = false;
  double progress = 0.0;
  double spl = 0.0;
  double ppl = 0.0;
};

/// success = all found; SPL = success * l / max(l, traveled);
/// PPL = progress * l_p / max(l_p, traveled_p). A zero length over a zero
/// distance counts as ratio 1.
Metrics compute_metrics(int targets, int found, double shortest, double traveled, double shortest_partial,
                        double traveled_partial);

/// Cells selected by non-maximum suppression: repeatedly take the highest
/// remaining cell (lowest index on ties) and drop the cells within Chebyshev
/// radius `radius` whose belief is strictly lower. Returned in selection order.
std::vector<int> nms_peaks(const GridSpec& grid, const Vector& cells, int radius = 1);

struct PredictionErrorReport {
  std::vector<int> predicted;  // first NMS peak per step
  std::vector<int> truth;      // next true cell per step
  std::vector<double> error;
  double mean = 0.0;
  double variance = 0.0;       // population variance
};

/// For each step t, the one-step prediction from the true cell c_t under M_t
/// (row c_t) is compared with c_{t+1}. The error is the Manhattan distance
/// over 2 (E - 1), averaged over the peaks tied at the maximum, which is the
/// expected error of choosing uniformly among them. `ms` holds one matrix per
/// step or a single matrix for all steps. Throws DimensionMismatch.
PredictionErrorReport prediction_error(const std::vector<Matrix>& ms, const std::vector<int>& cells,
                                       const GridSpec& grid);

/// Exact two-sided McNemar test on discordant pair counts b and c:
/// 2 P(Bin(b + c, 1/2) <= min(b, c)), capped at 1.
double mcnemar_exact_p(int b, int c);

}  // namespace robustnav
