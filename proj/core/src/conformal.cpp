#include "robustnav/conformal.hpp"

#include <algorithm>
#include <string>

#include "robustnav/parallel.hpp"

namespace robustnav::conformal {

std::size_t quantile_rank(std::size_t n, double coverage_alpha) {
  if (!(coverage_alpha > 0.0 && coverage_alpha < 1.0))
    throw InvalidAlpha("coverage_alpha must lie in (0, 1), got " + std::to_string(coverage_alpha));
  const double np1 = static_cast<double>(n + 1);
  // The guard keeps exact products such as 10 * 0.9 from rounding up a rank.
  const double k = std::ceil(np1 * (1.0 - coverage_alpha) - 1e-9 * np1);
  return static_cast<std::size_t>(std::max(1.0, k));
}

double calibrate(std::vector<double> scores, double coverage_alpha) {
  const std::size_t k = quantile_rank(scores.size(), coverage_alpha);
  if (scores.empty()) throw InvalidArgument("calibration set is empty");
  for (double s : scores)
    if (!std::isfinite(s)) throw InvalidArgument("calibration score is not finite");
  if (k > scores.size()) return kInf;
  std::stable_sort(scores.begin(), scores.end());
  return scores[k - 1];
}

bool UncertaintySet::contains(const Vector& m) const {
  if (q == kInf) return true;
  return picnn::score(*picnn, context, m) <= q;
}

bool membership(const UncertaintySet& set, const Vector& m) { return set.contains(m); }

struct ObjectUncertainty::MapCache {
  const picnn::Params* params = nullptr;
  std::vector<Vector> contexts;
  std::shared_ptr<const std::vector<picnn::EffectiveMaps>> maps;
};

std::shared_ptr<const std::vector<picnn::EffectiveMaps>> ObjectUncertainty::column_maps() const {
  std::lock_guard lock(*cache_mutex_);
  const bool fresh = cache_ && cache_->params == picnn.get() && cache_->contexts.size() == contexts.size() &&
                     std::equal(contexts.begin(), contexts.end(), cache_->contexts.begin(),
                                [](const Vector& a, const Vector& b) { return a.size() == b.size() && a == b; });
  if (!fresh) {
    auto maps = std::make_shared<std::vector<picnn::EffectiveMaps>>();
    for (const auto& x : contexts) maps->push_back(picnn::effective_maps(*picnn, x));
    auto cache = std::make_shared<MapCache>();
    cache->params = picnn.get();
    cache->contexts = contexts;
    cache->maps = std::move(maps);
    cache_ = std::move(cache);
  }
  return cache_->maps;
}

double ObjectUncertainty::score(const Matrix& m) const {
  if (m.cols() != cells() || m.rows() != picnn->input_dim)
    throw ShapeMismatch("uncertainty set: matrix is " + std::to_string(m.rows()) + "x" +
                        std::to_string(m.cols()) + ", expected " + std::to_string(picnn->input_dim) +
                        "x" + std::to_string(cells()));
  const auto maps = column_maps();
  double s = -kInf;
  for (int v = 0; v < cells(); ++v) s = std::max(s, picnn::score(*picnn, (*maps)[v], m.col(v)));
  return s;
}

double draw_score(const picnn::Params& params, const Draw& draw) {
  if (static_cast<Eigen::Index>(draw.contexts.size()) != draw.m.cols())
    throw ShapeMismatch("calibration draw: one context per column required");
  double s = -kInf;
  for (Eigen::Index v = 0; v < draw.m.cols(); ++v)
    s = std::max(s, picnn::score(params, draw.contexts[v], draw.m.col(v)));
  return s;
}

CoverageReport empirical_coverage(const picnn::Params& params, const Sampler& sampler,
                                  double coverage_alpha, int n_calib, int n_test, int n_trials,
                                  std::uint64_t seed) {
  quantile_rank(1, coverage_alpha);
  if (n_calib < 1 || n_test < 1 || n_trials < 1)
    throw InvalidArgument("empirical_coverage: sizes must be positive");
  CoverageReport rep;
  rep.trial_coverage.assign(n_trials, 0.0);
  rep.trial_q.assign(n_trials, 0.0);
  parallel_for(static_cast<std::size_t>(n_trials), [&](std::size_t i) {
    Rng rng(Rng::derive(seed, i));
    std::vector<double> scores(n_calib);
    for (auto& s : scores) s = draw_score(params, sampler(rng));
    const double q = calibrate(std::move(scores), coverage_alpha);
    int inside = 0;
    for (int t = 0; t < n_test; ++t)
      if (draw_score(params, sampler(rng)) <= q) ++inside;
    rep.trial_coverage[i] = static_cast<double>(inside) / n_test;
    rep.trial_q[i] = q;
  });
  double sum = 0.0, inf = 0.0;
  for (int i = 0; i < n_trials; ++i) {
    sum += rep.trial_coverage[i];
    if (rep.trial_q[i] == kInf) inf += 1.0;
  }
  rep.mean = sum / n_trials;
  double var = 0.0;
  for (double c : rep.trial_coverage) var += (c - rep.mean) * (c - rep.mean);
  rep.std_error = n_trials > 1 ? std::sqrt(var / (n_trials - 1) / n_trials) : 0.0;
  rep.infinite_q = inf / n_trials;
  return rep;
}

}  // namespace robustnav::conformal
