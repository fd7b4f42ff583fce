#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "robustnav/common.hpp"
#include "robustnav/picnn.hpp"

namespace robustnav::conformal {

/// 1-based rank ceil((n + 1)(1 - alpha)) of the calibrated score. A value
/// above n means the threshold is +inf. Throws InvalidAlpha unless 0 < alpha < 1.
std::size_t quantile_rank(std::size_t n, double coverage_alpha);

/// Split-conformal threshold: the quantile_rank-th smallest score, or +inf.
/// Throws InvalidAlpha, or InvalidArgument for an empty or non-finite set.
double calibrate(std::vector<double> scores, double coverage_alpha);

/// Omega(x) = {m : g(x, m) <= q} for one convex input vector.
struct UncertaintySet {
  std::shared_ptr<const picnn::Params> picnn;
  Vector context;
  double q = kInf;

  bool contains(const Vector& m) const;
};

bool membership(const UncertaintySet& set, const Vector& m);

/// Set over a whole transition matrix, decomposed per column: column v of M
/// (the probabilities of entering cell v) is scored with its own context, and
/// the matrix score is the maximum over columns.
struct ObjectUncertainty {
  std::shared_ptr<const picnn::Params> picnn;
  std::vector<Vector> contexts;  // one per column
  double q = kInf;
  /// Known row-stochastic member, used to seed samplers.
  std::optional<Matrix> anchor;

  int cells() const { return static_cast<int>(contexts.size()); }
  UncertaintySet column(int v) const { return {picnn, contexts[v], q}; }
  double score(const Matrix& m) const;
  bool contains(const Matrix& m) const { return score(m) <= q; }

 private:
  struct MapCache;
  // Per-column effective maps, rebuilt whenever picnn or contexts change.
  mutable std::shared_ptr<MapCache> cache_;
  mutable std::shared_ptr<std::mutex> cache_mutex_ = std::make_shared<std::mutex>();
  std::shared_ptr<const std::vector<picnn::EffectiveMaps>> column_maps() const;
};

/// One calibration pair: per-column contexts and the matrix they describe.
/// A single vector input is the one-column case.
struct Draw {
  std::vector<Vector> contexts;
  Matrix m;
};

using Sampler = std::function<Draw(Rng&)>;

/// max over columns of g(contexts[v], m.col(v)).
double draw_score(const picnn::Params& params, const Draw& draw);

struct CoverageReport {
  double mean = 0.0;
  double std_error = 0.0;    // across trials
  double infinite_q = 0.0;   // fraction of trials with q = +inf
  std::vector<double> trial_coverage;
  std::vector<double> trial_q;
};

/// Repeats {draw n_calib pairs, calibrate, score n_test fresh pairs} n_trials
/// times. Trial i uses the stream Rng::derive(seed, i).
CoverageReport empirical_coverage(const picnn::Params& params, const Sampler& sampler,
                                  double coverage_alpha, int n_calib, int n_test, int n_trials,
                                  std::uint64_t seed);

}  // namespace robustnav::conformal
