#include "robustnav/basis.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace robustnav {

namespace {

Matrix gaussian_lattice(const GridSpec& grid, int k) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(k))));
  if (side * side != k) throw InvalidArgument("gaussian basis: K must be a perfect square");
  const int V = grid.cells();
  const double spacing = static_cast<double>(grid.edge) / side;
  const double h2 = spacing * spacing;
  Matrix phi(V, k);
  for (int j = 0; j < k; ++j) {
    const Point anchor((j % side + 0.5) * spacing, (j / side + 0.5) * spacing);
    for (int v = 0; v < V; ++v) phi(v, j) = std::exp(-(grid.center(v) - anchor).squaredNorm() / (2.0 * h2));
  }
  // Symmetric orthonormalisation.
  Eigen::SelfAdjointEigenSolver<Matrix> es(phi.transpose() * phi);
  const Vector ev = es.eigenvalues();
  if (ev.minCoeff() <= 1e-12 * ev.maxCoeff()) throw InvalidArgument("gaussian basis: anchors are not independent on this grid");
  const Matrix inv_sqrt = es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  return phi * inv_sqrt;
}

}  // namespace

BasisExpansion::BasisExpansion(const GridSpec& grid, BasisKind kind, int k, const Matrix& m) : grid_(grid) {
  grid.validate();
  const int V = grid.cells();
  if (m.rows() != V || m.cols() != V) throw ShapeMismatch("basis: transition matrix does not match the grid");
  if (kind == BasisKind::Indicator) {
    if (k != V) throw InvalidArgument("indicator basis: K must equal V");
    phi_ = Matrix::Identity(V, V);
  } else {
    if (k < 1 || k > V) throw InvalidArgument("gaussian basis: K must be in [1, V]");
    phi_ = gaussian_lattice(grid, k);
  }
  g_ = phi_.transpose() * m.transpose() * phi_;
  ones_ = phi_.transpose() * Vector::Ones(V);
}

const Matrix& BasisExpansion::detection(const Point& p) const {
  const auto key = std::make_pair(p.x(), p.y());
  std::lock_guard lock(*cache_mutex_);
  auto it = detection_cache_.find(key);
  if (it == detection_cache_.end()) {
    const Vector d = detection_factor(grid_, p);
    it = detection_cache_.emplace(key, phi_.transpose() * d.asDiagonal() * phi_).first;
  }
  return it->second;
}

void BasisExpansion::set_interaction(const Matrix& g) {
  if (g.rows() != size() || g.cols() != size()) throw DimensionMismatch("basis: interaction must be K x K");
  g_ = g;
}

Vector basis_propagate(const BasisExpansion& expansion, const Vector& b_prev) {
  if (b_prev.size() != expansion.size())
    throw DimensionMismatch("basis_propagate: coefficient vector has length " + std::to_string(b_prev.size()) +
                            ", expected " + std::to_string(expansion.size()));
  return expansion.interaction() * b_prev;
}

std::vector<double> basis_capture(const BasisExpansion& expansion, const GridSpec& grid, const AgentPath& path,
                                  const Vector& initial) {
  const int V = grid.cells();
  if (initial.size() != V + 1) throw DimensionMismatch("basis_capture: initial belief must have V + 1 slots");
  std::vector<double> capture{initial[0]};
  Vector b = expansion.project(initial.tail(V));
  for (std::size_t t = 1; t < path.size(); ++t) {
    b = expansion.detection(path[t]) * basis_propagate(expansion, b);
    capture.push_back(1.0 - expansion.mass(b));
  }
  return capture;
}

}  // namespace robustnav
