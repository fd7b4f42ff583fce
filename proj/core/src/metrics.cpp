#include "robustnav/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace robustnav {

std::vector<int> bfs_distances(const GridSpec& grid, int from, const std::vector<bool>& blocked) {
  const int V = grid.cells(), E = grid.edge;
  if (from < 0 || from >= V) throw InvalidArgument("bfs: start cell out of range");
  if (!blocked.empty() && static_cast<int>(blocked.size()) != V) throw DimensionMismatch("bfs: blocked mask must have V entries");
  std::vector<int> dist(V, -1);
  std::deque<int> queue{from};
  dist[from] = 0;
  const int dx[] = {1, 0, -1, 0}, dy[] = {0, 1, 0, -1};
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int k = 0; k < 4; ++k) {
      const int x = u % E + dx[k], y = u / E + dy[k];
      if (x < 0 || y < 0 || x >= E || y >= E) continue;
      const int v = y * E + x;
      if (dist[v] >= 0 || (!blocked.empty() && blocked[v])) continue;
      dist[v] = dist[u] + 1;
      queue.push_back(v);
    }
  }
  return dist;
}

int shortest_tour(const GridSpec& grid, int start, const std::vector<int>& targets, bool ordered,
                  const std::vector<bool>& blocked) {
  if (!ordered && targets.size() > 8) throw InvalidArgument("shortest_tour: at most 8 unordered targets");
  std::vector<std::vector<int>> dist;
  dist.push_back(bfs_distances(grid, start, blocked));
  for (int t : targets) dist.push_back(bfs_distances(grid, t, blocked));
  auto length = [&](const std::vector<int>& order) {
    int total = 0, from = 0;
    for (int j : order) {
      const int d = dist[from][targets[j]];
      if (d < 0) throw InvalidArgument("shortest_tour: target unreachable");
      total += d;
      from = j + 1;
    }
    return total;
  };
  std::vector<int> order(targets.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = static_cast<int>(j);
  if (ordered) return length(order);
  int best = length(order);
  while (std::next_permutation(order.begin(), order.end())) best = std::min(best, length(order));
  return best;
}

namespace {

double ratio(double shortest, double traveled) {
  const double denom = std::max(shortest, traveled);
  return denom <= 0.0 ? 1.0 : shortest / denom;
}

}  // namespace

Metrics compute_metrics(int targets, int found, double shortest, double traveled, double shortest_partial,
                        double traveled_partial) {
  if (targets < 1 || found < 0 || found > targets) throw InvalidArgument("compute_metrics: bad target counts");
  Metrics m;
  m.success = found == targets;
  m.progress = static_cast<double>(found) / targets;
  m.spl = m.success ? ratio(shortest, traveled) : 0.0;
  m.ppl = found > 0 ? m.progress * ratio(shortest_partial, traveled_partial) : 0.0;
  return m;
}

std::vector<int> nms_peaks(const GridSpec& grid, const Vector& cells, int radius) {
  const int V = grid.cells(), E = grid.edge;
  if (cells.size() != V) throw DimensionMismatch("nms: belief must have V entries");
  std::vector<int> order(V);
  for (int v = 0; v < V; ++v) order[v] = v;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return cells[a] > cells[b]; });
  std::vector<bool> gone(V, false);
  std::vector<int> peaks;
  for (int u : order) {
    if (gone[u]) continue;
    peaks.push_back(u);
    for (int v = 0; v < V; ++v) {
      const int cheb = std::max(std::abs(u % E - v % E), std::abs(u / E - v / E));
      if (v != u && cheb <= radius && cells[v] < cells[u]) gone[v] = true;
    }
    gone[u] = true;
  }
  return peaks;
}

PredictionErrorReport prediction_error(const std::vector<Matrix>& ms, const std::vector<int>& cells,
                                       const GridSpec& grid) {
  const int V = grid.cells(), E = grid.edge;
  PredictionErrorReport rep;
  if (cells.size() < 2) return rep;
  const std::size_t steps = cells.size() - 1;
  if (ms.size() != 1 && ms.size() != steps) throw DimensionMismatch("prediction_error: one matrix per step or a single matrix");
  const double scale = E > 1 ? 2.0 * (E - 1) : 1.0;
  for (std::size_t t = 0; t < steps; ++t) {
    const Matrix& m = ms.size() == 1 ? ms[0] : ms[t];
    if (m.rows() != V || m.cols() != V) throw DimensionMismatch("prediction_error: matrix does not match the grid");
    if (cells[t] < 0 || cells[t] >= V || cells[t + 1] < 0 || cells[t + 1] >= V)
      throw InvalidArgument("prediction_error: cell out of range");
    const Vector belief = m.row(cells[t]).transpose();
    const std::vector<int> peaks = nms_peaks(grid, belief);
    const double top = belief[peaks.front()];
    const int next = cells[t + 1];
    double err = 0.0;
    int tied = 0;
    for (int p : peaks) {
      if (belief[p] < top) continue;
      err += (std::abs(p % E - next % E) + std::abs(p / E - next / E)) / scale;
      ++tied;
    }
    rep.predicted.push_back(peaks.front());
    rep.truth.push_back(next);
    rep.error.push_back(err / tied);
  }
  for (double e : rep.error) rep.mean += e;
  rep.mean /= static_cast<double>(rep.error.size());
  for (double e : rep.error) rep.variance += (e - rep.mean) * (e - rep.mean);
  rep.variance /= static_cast<double>(rep.error.size());
  return rep;
}

double mcnemar_exact_p(int b, int c) {
  if (b < 0 || c < 0) throw InvalidArgument("mcnemar: negative counts");
  const int n = b + c;
  if (n == 0) return 1.0;
  const int k = std::min(b, c);
  double tail = 0.0;
  for (int i = 0; i <= k; ++i)
    tail += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) - n * std::log(2.0));
  return std::min(1.0, 2.0 * tail);
}

}  // namespace robustnav
