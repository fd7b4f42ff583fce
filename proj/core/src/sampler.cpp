#include "robustnav/sampler.hpp"

namespace robustnav {

std::string to_string(DynamicsFamily family) {
  switch (family) {
    case DynamicsFamily::Drift: return "drift";
    case DynamicsFamily::RandomWalk: return "random-walk";
    case DynamicsFamily::Stationary: return "stationary";
  }
  return "unknown";
}

DynamicsFamily parse_family(const std::string& name) {
  if (name == "drift") return DynamicsFamily::Drift;
  if (name == "random-walk" || name == "random_walk") return DynamicsFamily::RandomWalk;
  if (name == "stationary") return DynamicsFamily::Stationary;
  throw InvalidArgument("unknown dynamics family '" + name + "'");
}

std::vector<Vector> column_contexts(const Matrix& nominal, const Vector& features) {
  std::vector<Vector> ctx;
  ctx.reserve(nominal.cols());
  for (Eigen::Index v = 0; v < nominal.cols(); ++v) {
    Vector x(nominal.rows() + features.size());
    x << nominal.col(v), features;
    ctx.push_back(std::move(x));
  }
  return ctx;
}

Matrix family_model(const GridSpec& grid, DynamicsFamily family, int dx, int dy, double param) {
  const int E = grid.edge, V = grid.cells();
  Matrix m = Matrix::Zero(V, V);
  auto inside = [E](int x, int y) { return x >= 0 && y >= 0 && x < E && y < E; };
  for (int u = 0; u < V; ++u) {
    const int x = u % E, y = u / E;
    switch (family) {
      case DynamicsFamily::Stationary:
        m(u, u) = 1.0;
        break;
      case DynamicsFamily::Drift:
        if ((dx != 0 || dy != 0) && inside(x + dx, y + dy)) {
          m(u, (y + dy) * E + (x + dx)) = param;
          m(u, u) = 1.0 - param;
        } else {
          m(u, u) = 1.0;
        }
        break;
      case DynamicsFamily::RandomWalk: {
        static constexpr int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        int count = 0;
        for (const auto& d : nb) count += inside(x + d[0], y + d[1]) ? 1 : 0;
        m(u, u) = param;
        for (const auto& d : nb)
          if (inside(x + d[0], y + d[1])) m(u, (y + d[1]) * E + (x + d[0])) = (1.0 - param) / count;
        break;
      }
    }
  }
  return m;
}

Matrix dirichlet_rows(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (int u = 0; u < rows; ++u) {
    for (int v = 0; v < cols; ++v) m(u, v) = rng.exponential();
    m.row(u) /= m.row(u).sum();
  }
  return m;
}

CalibrationPair draw_pair(const GridSpec& grid, DynamicsFamily family, double noise, Rng& rng) {
  static constexpr int dirs[8][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
  int dx = 0, dy = 0;
  double param = 0.0;
  if (family == DynamicsFamily::Drift) {
    const auto& d = dirs[rng.below(8)];
    dx = d[0];
    dy = d[1];
    param = rng.uniform(0.6, 0.9);
  } else if (family == DynamicsFamily::RandomWalk) {
    param = rng.uniform(0.2, 0.5);
  }
  const double eta = noise > 0.0 ? std::min(1.0, noise * rng.uniform(0.5, 1.5)) : 0.0;
  CalibrationPair pair;
  pair.nominal = family_model(grid, family, dx, dy, param);
  pair.truth = pair.nominal;
  if (eta > 0.0) pair.truth = (1.0 - eta) * pair.nominal + eta * dirichlet_rows(grid.cells(), grid.cells(), rng);
  pair.features.resize(kFeatureDim);
  pair.features << eta, dx, dy, static_cast<double>(static_cast<int>(family));
  pair.contexts = column_contexts(pair.nominal, pair.features);
  return pair;
}

SyntheticSampler::SyntheticSampler(const GridSpec& grid, DynamicsFamily family, double noise,
                                   std::uint64_t seed)
    : grid_(grid), family_(family), noise_(noise), rng_(seed) {
  grid_.validate();
  if (!(noise >= 0.0)) throw InvalidArgument("sampler: noise must be >= 0");
}

CalibrationPair SyntheticSampler::next() { return draw_pair(grid_, family_, noise_, rng_); }

conformal::Sampler SyntheticSampler::as_conformal() const {
  const GridSpec grid = grid_;
  const DynamicsFamily family = family_;
  const double noise = noise_;
  return [grid, family, noise](Rng& rng) {
    CalibrationPair p = draw_pair(grid, family, noise, rng);
    return conformal::Draw{std::move(p.contexts), std::move(p.truth)};
  };
}

}  // namespace robustnav
