#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "robustnav/belief.hpp"
#include "robustnav/conformal.hpp"

namespace robustnav {

enum class DynamicsFamily { Drift, RandomWalk, Stationary };

std::string to_string(DynamicsFamily family);
/// Accepts "drift", "random-walk", "stationary". Throws InvalidArgument.
DynamicsFamily parse_family(const std::string& name);

/// Number of summary features appended to every column context.
inline constexpr int kFeatureDim = 4;

/// One synthetic (x, M) pair. `nominal` is the model predicted from the
/// features alone; `truth` is the nominal mixed with random rows at the
/// drawn noise level. Both are row-stochastic.
struct CalibrationPair {
  Vector features;  // noise level, drift x, drift y, family code
  Matrix nominal;
  Matrix truth;
  std::vector<Vector> contexts;  // column v: [nominal.col(v); features]
};

/// Context of column v: the predicted column followed by the features.
std::vector<Vector> column_contexts(const Matrix& nominal, const Vector& features);

/// Nominal dynamics of a family. drift = (dx, dy) in {-1, 0, 1}^2 for Drift;
/// `param` is the move probability (Drift) or the stay probability (RandomWalk).
Matrix family_model(const GridSpec& grid, DynamicsFamily family, int dx, int dy, double param);

/// Row-stochastic matrix with Dirichlet(1, ..., 1) rows.
Matrix dirichlet_rows(int rows, int cols, Rng& rng);

CalibrationPair draw_pair(const GridSpec& grid, DynamicsFamily family, double noise, Rng& rng);

/// Deterministic stream of i.i.d. pairs.
class SyntheticSampler {
 public:
  SyntheticSampler(const GridSpec& grid, DynamicsFamily family, double noise, std::uint64_t seed);

  CalibrationPair next();
  int context_dim() const { return grid_.cells() + kFeatureDim; }
  /// Adapter for conformal::empirical_coverage (draws from the supplied rng).
  conformal::Sampler as_conformal() const;

 private:
  GridSpec grid_;
  DynamicsFamily family_;
  double noise_;
  Rng rng_;
};

}  // namespace robustnav
