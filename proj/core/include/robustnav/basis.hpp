#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "robustnav/belief.hpp"

namespace robustnav {

enum class BasisKind { Indicator, Gaussian };

/// Reduced belief dynamics on an orthonormal cell basis Phi (V x K):
/// cell beliefs are approximated by Phi b, propagation becomes a = G b with
/// G = Phi^T M^T Phi, and detection becomes b = Phi^T diag(d) Phi a.
///
/// The Gaussian basis places separable bumps exp(-|c - z_k|^2 / (2 h^2)) on a
/// sqrt(K) x sqrt(K) lattice of anchors z_k with bandwidth h = E / sqrt(K),
/// then orthonormalises them symmetrically (Phi (Phi^T Phi)^{-1/2}). The
/// indicator basis (K = V) is exact.
class BasisExpansion {
 public:
  /// Throws InvalidArgument (K not a perfect square for Gaussian, K != V for
  /// Indicator) and ShapeMismatch.
  BasisExpansion(const GridSpec& grid, BasisKind kind, int k, const Matrix& m);

  int size() const { return static_cast<int>(phi_.cols()); }
  const Matrix& phi() const { return phi_; }
  /// G[k][l] with a_k = sum_l G[k][l] b_l.
  const Matrix& interaction() const { return g_; }

  Vector project(const Vector& cells) const { return phi_.transpose() * cells; }
  Vector reconstruct(const Vector& coeffs) const { return phi_ * coeffs; }
  /// Sum of the cell beliefs represented by `coeffs`.
  double mass(const Vector& coeffs) const { return ones_.dot(coeffs); }

  /// Phi^T diag(d(p)) Phi, cached per position. Thread-safe.
  const Matrix& detection(const Point& p) const;

  /// Replaces G by an arbitrary K x K kernel. Throws DimensionMismatch.
  void set_interaction(const Matrix& g);

 private:
  GridSpec grid_;
  Matrix phi_;
  Matrix g_;
  Vector ones_;  // Phi^T 1
  mutable std::map<std::pair<double, double>, Matrix> detection_cache_;
  std::unique_ptr<std::mutex> cache_mutex_ = std::make_unique<std::mutex>();
};

/// a = G b_prev. Throws DimensionMismatch.
Vector basis_propagate(const BasisExpansion& expansion, const Vector& b_prev);

/// Capture beliefs (slot 0) for t = 0 .. tau under the reduced dynamics;
/// capture^t = 1 - mass(b^t), starting from the projection of `initial`.
std::vector<double> basis_capture(const BasisExpansion& expansion, const GridSpec& grid, const AgentPath& path,
                                  const Vector& initial);

}  // namespace robustnav
