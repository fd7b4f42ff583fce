#include "robustnav/scenario.hpp"

#include "robustnav/counterpart.hpp"
#include "robustnav/sampler.hpp"

namespace robustnav::robust {

namespace {

bool row_stochastic(const Matrix& m) {
  if (m.minCoeff() < 0.0) return false;
  for (Eigen::Index u = 0; u < m.rows(); ++u)
    if (std::abs(m.row(u).sum() - 1.0) > 1e-9) return false;
  return true;
}

}  // namespace

Matrix bisect_toward(const conformal::ObjectUncertainty& set, const Matrix& from, const Matrix& to, int iters) {
  if (set.contains(to)) return to;
  double lo = 0.0, hi = 1.0;
  for (int k = 0; k < iters; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (set.contains(from + mid * (to - from))) lo = mid;
    else hi = mid;
  }
  if (lo == 0.0) return from;
  return from + lo * (to - from);
}

Matrix find_member(const conformal::ObjectUncertainty& set, Rng& rng, int budget) {
  if (set.anchor && row_stochastic(*set.anchor) && set.contains(*set.anchor)) return *set.anchor;
  const int V = set.cells();
  for (int k = 0; k < budget; ++k) {
    Matrix m = dirichlet_rows(V, V, rng);
    if (set.contains(m)) return m;
  }
  throw EmptySet("no member of the uncertainty set found after " + std::to_string(budget) + " draws");
}

ScenarioResult inner_max_scenario(const GridSpec& grid, const AgentPath& path,
                                  const std::vector<conformal::ObjectUncertainty>& sets,
                                  const std::vector<Vector>& initial, const ScenarioOptions& options,
                                  std::uint64_t seed) {
  if (sets.size() != initial.size()) throw ShapeMismatch("scenario: one initial belief per object required");
  if (options.n_scenarios < 1) throw InvalidArgument("scenario: n_scenarios must be >= 1");
  validate_path(grid, path, path.front());
  const int V = grid.cells();
  const int climbs = options.hill_climb_steps < 0 ? options.n_scenarios - 1 : options.hill_climb_steps;
  ScenarioResult res;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const auto& set = sets[i];
    if (set.cells() != V) throw ShapeMismatch("scenario: set does not match the grid");
    Rng rng(Rng::derive(seed, i));
    const Matrix anchor = find_member(set, rng, options.rejection_budget);
    Matrix best = anchor;
    double best_value = adversarial_value(grid, path, anchor, initial[i]);
    ++res.evaluations;
    for (int s = 1; s < options.n_scenarios; ++s) {
      Rng draw(Rng::derive(Rng::derive(seed, i), s));
      const Matrix cand = bisect_toward(set, anchor, dirichlet_rows(V, V, draw), options.bisection_iters);
      const double value = adversarial_value(grid, path, cand, initial[i]);
      ++res.evaluations;
      if (value > best_value) {
        best_value = value;
        best = cand;
      }
    }
    Rng climb(Rng::derive(Rng::derive(seed, i), ~0ULL));
    for (int h = 0; h < climbs; ++h) {
      const double step = 0.02 + 0.3 * (1.0 - static_cast<double>(h) / climbs);
      const int u = static_cast<int>(climb.below(V));
      Matrix prop = best;
      prop.row(u) = (1.0 - step) * best.row(u) + step * dirichlet_rows(1, V, climb);
      const Matrix cand = bisect_toward(set, best, prop, options.bisection_iters);
      const double value = adversarial_value(grid, path, cand, initial[i]);
      ++res.evaluations;
      if (value > best_value) {
        best_value = value;
        best = cand;
      }
    }
    res.value += best_value;
    res.object_value.push_back(best_value);
    res.worst.push_back(std::move(best));
  }
  return res;
}

}  // namespace robustnav::robust
