#include "robustnav/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "robustnav/metrics.hpp"
#include "robustnav/parallel.hpp"
#include "robustnav/planner.hpp"
#include "robustnav/scenario.hpp"

namespace robustnav::sim {

double pair_score(const picnn::Params& params, const CalibrationPair& pair) {
  double s = -kInf;
  for (Eigen::Index v = 0; v < pair.truth.cols(); ++v)
    s = std::max(s, picnn::score(params, pair.contexts[v], pair.truth.col(v)));
  return s;
}

std::vector<double> pair_scores(const picnn::Params& params, const std::vector<CalibrationPair>& pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(pair_score(params, p));
  return out;
}

std::vector<CalibrationPair> draw_pairs(const GridSpec& grid, DynamicsFamily family, double noise, int n,
                                        std::uint64_t seed) {
  SyntheticSampler sampler(grid, family, noise, seed);
  std::vector<CalibrationPair> out;
  for (int i = 0; i < n; ++i) out.push_back(sampler.next());
  return out;
}

ScoreModel calibrate_score(std::shared_ptr<const picnn::Params> params, const std::vector<CalibrationPair>& pairs,
                           double coverage_alpha) {
  ScoreModel m;
  m.q = conformal::calibrate(pair_scores(*params, pairs), coverage_alpha);
  m.picnn = std::move(params);
  return m;
}

conformal::ObjectUncertainty object_set(const ScoreModel& model, const CalibrationPair& pair) {
  conformal::ObjectUncertainty set;
  set.picnn = model.picnn;
  set.contexts = pair.contexts;
  set.q = model.q;
  set.anchor = pair.nominal;
  return set;
}

std::shared_ptr<const picnn::Params> make_score_network(const std::string& kind, const GridSpec& grid,
                                                        std::uint64_t seed, int hidden) {
  const int V = grid.cells();
  if (kind == "l1") return std::make_shared<const picnn::Params>(picnn::l1_ball_params(V, V + kFeatureDim, 0));
  if (kind == "random")
    return std::make_shared<const picnn::Params>(picnn::random_params(1, hidden, V + kFeatureDim, V, seed));
  throw InvalidArgument("unknown score network '" + kind + "' (expected l1 or random)");
}

namespace {

Interval interval(const std::vector<double>& xs) {
  Interval iv;
  if (xs.empty()) return iv;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) iv.mean += x;
  iv.mean /= n;
  if (xs.size() < 2) return iv;
  double ss = 0.0;
  for (double x : xs) ss += (x - iv.mean) * (x - iv.mean);
  iv.half_width = 1.96 * std::sqrt(ss / (n - 1.0) / n);
  return iv;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

}  // namespace

SuiteReport benchmark_suite(const SuiteConfig& config) {
  if (config.episodes < 0) throw InvalidArgument("suite: episodes must be >= 0");
  config.episode.validate();
  SuiteReport rep;
  const GridSpec& g = config.episode.grid;
  const auto net = make_score_network(config.score, g, Rng::derive(config.seed, 0xC0FFEE));
  rep.score = calibrate_score(net,
                              draw_pairs(g, config.episode.family, config.episode.noise, config.calibration_points,
                                         Rng::derive(config.seed, 0xCA11B)),
                              config.coverage_alpha);
  const std::size_t P = config.policies.size(), N = static_cast<std::size_t>(config.episodes);
  rep.rows.resize(P * N);
  parallel_for(
      P * N,
      [&](std::size_t j) {
        const std::size_t pi = j / N, e = j % N;
        auto policy = make_policy(config.policies[pi], rep.score);
        const auto t0 = std::chrono::steady_clock::now();
        EpisodeRow& row = rep.rows[j];
        row.episode_id = static_cast<int>(e);
        row.policy = config.policies[pi];
        row.result = run_episode(config.episode, *policy, Rng::derive(config.seed, e));
        row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      },
      config.threads);
  for (std::size_t pi = 0; pi < P; ++pi) {
    PolicySummary s;
    s.policy = config.policies[pi];
    s.episodes = config.episodes;
    std::vector<double> su, pr, spl, ppl;
    for (std::size_t e = 0; e < N; ++e) {
      const EpisodeResult& r = rep.rows[pi * N + e].result;
      su.push_back(r.success ? 1.0 : 0.0);
      pr.push_back(r.progress);
      spl.push_back(r.spl);
      ppl.push_back(r.ppl);
    }
    s.success = interval(su);
    s.progress = interval(pr);
    s.spl = interval(spl);
    s.ppl = interval(ppl);
    rep.summary.push_back(s);
  }
  return rep;
}

void write_episode_csv(std::ostream& out, const SuiteReport& report, bool timings) {
  out << "episode_id,policy,success,progress,spl,ppl,steps,wall_ms\n";
  for (const auto& row : report.rows) {
    const auto& r = row.result;
    out << row.episode_id << ',' << to_string(row.policy) << ',' << (r.success ? 1 : 0) << ',' << fmt(r.progress)
        << ',' << fmt(r.spl) << ',' << fmt(r.ppl) << ',' << r.steps << ',' << (timings ? fmt(row.wall_ms) : "NA")
        << '\n';
  }
}

void write_summary_csv(std::ostream& out, const SuiteReport& report) {
  out << "policy,episodes,success_mean,success_ci,progress_mean,progress_ci,spl_mean,spl_ci,ppl_mean,ppl_ci\n";
  for (const auto& s : report.summary) {
    out << to_string(s.policy) << ',' << s.episodes;
    for (const Interval* iv : {&s.success, &s.progress, &s.spl, &s.ppl})
      out << ',' << fmt(iv->mean) << ',' << fmt(iv->half_width);
    out << '\n';
  }
}

PairedTest paired_success_test(const SuiteReport& report, PolicyKind a, PolicyKind b) {
  std::vector<int> sa, sb;
  for (const auto& row : report.rows) {
    if (row.policy == a) sa.push_back(row.result.success);
    if (row.policy == b) sb.push_back(row.result.success);
  }
  if (sa.size() != sb.size()) throw InvalidArgument("paired test: policies ran different episode counts");
  PairedTest t;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    if (sa[i] && sb[i]) ++t.both;
    else if (sa[i]) ++t.only_a;
    else if (sb[i]) ++t.only_b;
    else ++t.neither;
  }
  t.p_value = mcnemar_exact_p(t.only_a, t.only_b);
  return t;
}

std::string to_string(ScalingVariant variant) {
  switch (variant) {
    case ScalingVariant::Counterpart: return "counterpart";
    case ScalingVariant::DenseModel: return "dense";
    case ScalingVariant::BasisModel: return "basis";
  }
  return "?";
}

ScalingVariant parse_scaling_variant(const std::string& name) {
  if (name == "counterpart") return ScalingVariant::Counterpart;
  if (name == "dense") return ScalingVariant::DenseModel;
  if (name == "basis") return ScalingVariant::BasisModel;
  throw InvalidArgument("unknown scaling variant '" + name + "' (expected counterpart, dense or basis)");
}

std::vector<ScalingRow> bench_scaling(const ScalingConfig& config) {
  if (config.repeats < 1) throw InvalidArgument("bench_scaling: repeats must be >= 1");
  std::vector<ScalingRow> rows;
  for (int e : config.edges)
    for (int tau : config.horizons) {
      GridSpec g;
      g.edge = e;
      g.horizon = tau;
      const std::uint64_t seed = Rng::derive(Rng::derive(config.seed, e), tau);
      const auto pairs = draw_pairs(g, DynamicsFamily::Drift, 0.3, 200 + config.objects, seed);
      const std::vector<CalibrationPair> calib(pairs.begin(), pairs.begin() + 200);
      std::unique_ptr<robust::PathEvaluator> ev;
      if (config.variant == ScalingVariant::Counterpart) {
        const ScoreModel sm = calibrate_score(make_score_network("random", g, seed, config.hidden), calib, 0.1);
        std::vector<conformal::ObjectUncertainty> sets;
        for (int i = 0; i < config.objects; ++i) sets.push_back(object_set(sm, pairs[200 + i]));
        ev = std::make_unique<robust::CounterpartEvaluator>(g, sets, std::vector<Vector>{});
      } else {
        std::vector<Matrix> ms;
        for (int i = 0; i < config.objects; ++i) ms.push_back(pairs[200 + i].truth);
        if (config.variant == ScalingVariant::DenseModel)
          ev = std::make_unique<robust::ModelEvaluator>(g, ms, std::vector<Vector>{});
        else
          ev = std::make_unique<robust::BasisModelEvaluator>(g, ms, std::vector<Vector>{}, BasisKind::Gaussian,
                                                             std::min(config.basis_k, g.cells()));
      }
      robust::PlanOptions opt;
      opt.beam_width = config.beam_width;
      opt.threads = config.threads;
      std::vector<double> ms_times;
      ScalingRow row;
      row.edge = e;
      row.horizon = tau;
      row.variant = to_string(config.variant);
      for (int r = 0; r < config.repeats; ++r) {
        const auto res = robust::plan(g, *ev, opt);
        ms_times.push_back(res.wall_ms);
        row.evaluations = res.evaluations;
        row.value = res.robust_value;
      }
      std::sort(ms_times.begin(), ms_times.end());
      const std::size_t n = ms_times.size();
      row.median_ms = n % 2 ? ms_times[n / 2] : 0.5 * (ms_times[n / 2 - 1] + ms_times[n / 2]);
      rows.push_back(row);
    }
  return rows;
}

void write_scaling_csv(std::ostream& out, const std::vector<ScalingRow>& rows, bool timings) {
  out << "edge,horizon,variant,median_ms,evaluations,value\n";
  for (const auto& r : rows)
    out << r.edge << ',' << r.horizon << ',' << r.variant << ',' << (timings ? fmt(r.median_ms) : "NA") << ','
        << r.evaluations << ',' << fmt(r.value) << '\n';
}

std::vector<PredictionSuiteRow> prediction_error_suite(const PredictionSuiteConfig& config) {
  const GridSpec& g = config.grid;
  const int V = g.cells();
  const auto net = make_score_network("l1", g, 0);
  const auto calib = draw_pairs(g, config.family, config.noise, config.calibration_points, Rng::derive(config.seed, 1));
  const double test_noise = config.test_noise < 0.0 ? config.noise : config.test_noise;
  auto tests = draw_pairs(g, config.family, test_noise, config.instances, Rng::derive(config.seed, 2));
  if (config.family == DynamicsFamily::Drift && config.drift_shift > 0.0) {
    static constexpr int dirs[8][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
    Rng turn(Rng::derive(config.seed, 4));
    for (auto& pair : tests) {
      const int dx = static_cast<int>(pair.features[1]), dy = static_cast<int>(pair.features[2]);
      int d = 0;
      while (dirs[d][0] != dx || dirs[d][1] != dy) ++d;
      d = (d + (turn.below(2) == 0 ? 1 : 7)) % 8;
      const double param = (pair.nominal - Matrix(pair.nominal.diagonal().asDiagonal())).maxCoeff();
      const Matrix off = family_model(g, DynamicsFamily::Drift, dirs[d][0], dirs[d][1], param);
      pair.truth = (1.0 - config.drift_shift) * pair.truth + config.drift_shift * off;
    }
  }
  // Object trajectories under the truth, shared by every alpha.
  std::vector<std::vector<int>> paths;
  Rng walk(Rng::derive(config.seed, 3));
  for (const auto& pair : tests) {
    std::vector<int> cells{static_cast<int>(walk.below(V))};
    for (int t = 0; t < config.steps; ++t) {
      const double r = walk.uniform();
      double acc = 0.0;
      int next = V - 1;
      for (int v = 0; v < V; ++v) {
        acc += pair.truth(cells.back(), v);
        if (r < acc) {
          next = v;
          break;
        }
      }
      cells.push_back(next);
    }
    paths.push_back(std::move(cells));
  }
  std::vector<PredictionSuiteRow> rows;
  for (double alpha : config.alphas) {
    const ScoreModel sm = calibrate_score(net, calib, alpha);
    PredictionSuiteRow row;
    row.coverage_alpha = alpha;
    row.q = sm.q;
    std::vector<double> errors;
    for (std::size_t i = 0; i < tests.size(); ++i) {
      const auto set = object_set(sm, tests[i]);
      const Matrix learned = robust::bisect_toward(set, tests[i].nominal, tests[i].truth, 40);
      const auto rep = prediction_error({learned}, paths[i], g);
      errors.insert(errors.end(), rep.error.begin(), rep.error.end());
    }
    if (!errors.empty()) {
      for (double e : errors) row.mean += e;
      row.mean /= static_cast<double>(errors.size());
      for (double e : errors) row.variance += (e - row.mean) * (e - row.mean);
      row.variance /= static_cast<double>(errors.size());
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace robustnav::sim
