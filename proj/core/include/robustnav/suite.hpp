#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "robustnav/conformal.hpp"
#include "robustnav/episode.hpp"
#include "robustnav/sampler.hpp"

namespace robustnav::sim {

/// max_v g(x_v, M.col(v)) with the pair's column contexts.
double pair_score(const picnn::Params& params, const CalibrationPair& pair);
/// pair_score(truth) for every pair.
std::vector<double> pair_scores(const picnn::Params& params, const std::vector<CalibrationPair>& pairs);

/// `n` pairs from SyntheticSampler(grid, family, noise, seed).
std::vector<CalibrationPair> draw_pairs(const GridSpec& grid, DynamicsFamily family, double noise, int n,
                                        std::uint64_t seed);

/// Conformal threshold of the score network on calibration pairs.
ScoreModel calibrate_score(std::shared_ptr<const picnn::Params> params, const std::vector<CalibrationPair>& pairs,
                           double coverage_alpha);

/// Set of one object: the score network at the pair's contexts, anchored at
/// the nominal model.
conformal::ObjectUncertainty object_set(const ScoreModel& model, const CalibrationPair& pair);

/// Score networks offered by the tools: "l1" (column L1 distance to the
/// nominal column) or "random" (random weights, one hidden layer of `hidden`).
std::shared_ptr<const picnn::Params> make_score_network(const std::string& kind, const GridSpec& grid,
                                                        std::uint64_t seed, int hidden = 4);

struct SuiteConfig {
  EpisodeConfig episode;
  std::vector<PolicyKind> policies{PolicyKind::Neuro, PolicyKind::Random, PolicyKind::GreedyBelief};
  int episodes = 100;
  std::uint64_t seed = 0;
  std::string score = "l1";
  double coverage_alpha = 0.1;
  int calibration_points = 200;
  int threads = 0;
};

struct EpisodeRow {
  int episode_id = 0;
  PolicyKind policy = PolicyKind::Random;
  EpisodeResult result;
  double wall_ms = 0.0;
};

struct Interval {
  double mean = 0.0;
  double half_width = 0.0;  // 1.96 standard errors
};

struct PolicySummary {
  PolicyKind policy = PolicyKind::Random;
  int episodes = 0;
  Interval success, progress, spl, ppl;
};

struct SuiteReport {
  ScoreModel score;
  std::vector<EpisodeRow> rows;  // sorted by (policy order, episode id)
  std::vector<PolicySummary> summary;
};

/// Episode i of every policy runs on seed Rng::derive(config.seed, i).
SuiteReport benchmark_suite(const SuiteConfig& config);

/// episode_id,policy,success,progress,spl,ppl,steps,wall_ms. wall_ms is NA
/// unless `timings`.
void write_episode_csv(std::ostream& out, const SuiteReport& report, bool timings = false);
/// policy,episodes,<metric>_mean,<metric>_ci for success, progress, spl, ppl.
void write_summary_csv(std::ostream& out, const SuiteReport& report);

struct PairedTest {
  int both = 0;
  int only_a = 0;
  int only_b = 0;
  int neither = 0;
  double p_value = 1.0;
};
/// McNemar exact test on the success flags of two policies over shared episodes.
PairedTest paired_success_test(const SuiteReport& report, PolicyKind a, PolicyKind b);

enum class ScalingVariant { Counterpart, DenseModel, BasisModel };
std::string to_string(ScalingVariant variant);
ScalingVariant parse_scaling_variant(const std::string& name);

struct ScalingConfig {
  std::vector<int> edges{3, 4, 5};
  std::vector<int> horizons{4};
  ScalingVariant variant = ScalingVariant::Counterpart;
  int objects = 1;
  int repeats = 10;
  int beam_width = 32;
  int basis_k = 16;  // capped at V
  int hidden = 4;  // score network width for the counterpart variant
  std::uint64_t seed = 0;
  int threads = 0;
};

struct ScalingRow {
  int edge = 0;
  int horizon = 0;
  std::string variant;
  double median_ms = 0.0;
  int evaluations = 0;
  double value = 0.0;  // plan objective, identical across repeats
};

/// Median wall time of plan() per (E, tau) point.
std::vector<ScalingRow> bench_scaling(const ScalingConfig& config);
/// edge,horizon,variant,median_ms,evaluations,value; median_ms is NA unless `timings`.
void write_scaling_csv(std::ostream& out, const std::vector<ScalingRow>& rows, bool timings = false);

struct PredictionSuiteConfig {
  GridSpec grid;
  std::vector<double> alphas{0.01, 0.05, 0.1, 0.2};
  DynamicsFamily family = DynamicsFamily::Drift;
  double noise = 0.3;
  double test_noise = -1.0;  // noise of the test instances; < 0: same as calibration
  // Drift family: fraction of each test object's motion that drifts 45 degrees
  // off the nominal direction (a misspecified predictor).
  double drift_shift = 0.8;
  int calibration_points = 200;
  int instances = 200;
  int steps = 10;
  std::uint64_t seed = 0;
};

struct PredictionSuiteRow {
  double coverage_alpha = 0.0;
  double q = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

/// Per instance the learned model is the member of the calibrated set closest
/// to the truth along the segment from the nominal model (bisection), and the
/// object's cells follow the truth. Errors are pooled over instances.
std::vector<PredictionSuiteRow> prediction_error_suite(const PredictionSuiteConfig& config);

}  // namespace robustnav::sim
