// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Usage: robustnav_acceptance <path to robustnav CLI>
// [criterion numbers...].

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "robustnav/basis.hpp"
#include "robustnav/counterpart.hpp"
#include "robustnav/lp.hpp"
#include "robustnav/planner.hpp"
#include "robustnav/scenario.hpp"
#include "robustnav/sensitivity.hpp"
#include "robustnav/suite.hpp"
#include "support/instances.hpp"
#include "support/lp_oracles.hpp"

using namespace robustnav;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

Matrix random_stochastic(Rng& rng, int V) { return dirichlet_rows(V, V, rng); }

// 1. Split-conformal coverage of a fixed random score network.
Outcome coverage() {
  const auto t0 = Clock::now();
  const GridSpec g = oracle::make_grid(3, 1);
  const SyntheticSampler sampler(g, DynamicsFamily::Drift, 0.3, 11);
  const auto net = picnn::random_params(1, 4, sampler.context_dim(), g.cells(), 2024);
  const auto rep = conformal::empirical_coverage(net, sampler.as_conformal(), 0.1, 200, 5000, 100, 5);
  const double secs = seconds_since(t0);
  const bool pass = rep.mean >= 0.900 - 0.02 && rep.mean <= 0.905 + 0.02 && secs < 60.0;
  return {pass, fmt("mean coverage %.4f (target [0.900, 0.905] +/- 0.02), %.1f s (< 60 s)", rep.mean, secs)};
}

// 2. Midpoint convexity in the convex input after weight projection.
Outcome convexity() {
  Rng rng(77);
  int violations = 0;
  double worst = -kInf;
  for (int trial = 0; trial < 1000; ++trial) {
    const int L = 1 + static_cast<int>(rng.below(3)), d = 1 + static_cast<int>(rng.below(6));
    const int c = 1 + static_cast<int>(rng.below(5)), V = 1 + static_cast<int>(rng.below(9));
    auto p = picnn::random_params(L, d, c, V, rng.next(), rng.uniform(0.0, 0.1));
    for (auto& l : p.layer) l.convex_weight.array() -= 0.3;
    p = picnn::project_weights(p);
    Vector x(c), m1(V), m2(V);
    for (int i = 0; i < c; ++i) x[i] = rng.uniform(-2, 2);
    for (int i = 0; i < V; ++i) m1[i] = rng.uniform(-1, 2), m2[i] = rng.uniform(-1, 2);
    const double t = rng.uniform();
    const double gap = picnn::score(p, x, t * m1 + (1 - t) * m2) -
                       (t * picnn::score(p, x, m1) + (1 - t) * picnn::score(p, x, m2));
    worst = std::max(worst, gap);
    if (gap > 1e-9) ++violations;
  }
  return {violations == 0, fmt("%d of 1000 midpoint violations above 1e-9 (largest excess %.2e)", violations, worst)};
}

// 3. Belief normalization and monotone capture over random rollouts.
Outcome belief_invariants() {
  Rng rng(3);
  double worst_norm = 0.0;
  int decreases = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int e = 2 + static_cast<int>(rng.below(4)), tau = 1 + static_cast<int>(rng.below(6));
    const GridSpec g = oracle::make_grid(e, tau);
    const AgentPath path = oracle::random_path(g, tau, rng);
    const auto seq = rollout(g, path, random_stochastic(rng, e * e));
    for (std::size_t t = 0; t < seq.size(); ++t) {
      worst_norm = std::max(worst_norm, std::abs(seq[t].sum() - 1.0));
      if (t > 0 && seq[t][0] < seq[t - 1][0]) ++decreases;
    }
  }
  return {worst_norm <= 1e-12 && decreases == 0,
          fmt("max |sum - 1| = %.2e (<= 1e-12), %d capture decreases", worst_norm, decreases)};
}

// 4. True activations of a member satisfy the epigraph embedding.
Outcome epigraph() {
  Rng rng(404);
  int failures = 0;
  double worst = -kInf;
  for (int trial = 0; trial < 1000; ++trial) {
    const int L = 1 + static_cast<int>(rng.below(3)), d = 1 + static_cast<int>(rng.below(5));
    const int c = 1 + static_cast<int>(rng.below(4)), V = 1 + static_cast<int>(rng.below(9));
    const auto p = picnn::random_params(L, d, c, V, rng.next());
    Vector x(c), m(V);
    for (int i = 0; i < c; ++i) x[i] = rng.uniform(-1, 1);
    for (int i = 0; i < V; ++i) m[i] = rng.uniform(0, 1);
    const auto act = picnn::forward(p, x, m);
    const double q = act.score + (trial % 10 == 0 ? 0.0 : rng.uniform(0.0, 1.0));
    const auto e = picnn::embed(p, x, q);
    const double excess = (e.a * picnn::stacked_activations(act, m) - e.b).maxCoeff();
    worst = std::max(worst, excess);
    if (excess > 1e-10) ++failures;
  }
  return {failures == 0, fmt("%d of 1000 members violate A k <= b + 1e-10 (largest excess %.2e)", failures, worst)};
}

// 5. LP certificates and agreement with vertex enumeration.
Outcome lp_certificates() {
  Rng rng(5150);
  int gap_failures = 0, enum_checked = 0, enum_failures = 0, not_optimal = 0;
  double worst_gap = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(50)), m = static_cast<int>(rng.below(51));
    const int p = static_cast<int>(rng.below(std::min(n, 5) + 1)) % n;
    const bool small = n <= 3;
    auto prob = oracle::random_feasible_lp(rng, n, small ? std::min(m, 12) : m, p, /*allow_free=*/!small);
    if (small)
      for (int j = 0; j < n; ++j)
        if (!std::isfinite(prob.upper(j))) prob.var_upper[j] = prob.var_lower[j] + 4.0 + rng.uniform();
    const auto s = lp::solve(prob);
    if (s.status != lp::Status::Optimal) {
      ++not_optimal;
      continue;
    }
    const double gap = lp::duality_gap(s, prob) / (1.0 + std::abs(s.objective));
    worst_gap = std::max(worst_gap, gap);
    if (gap > 1e-8) ++gap_failures;
    if (small) {
      ++enum_checked;
      const double best = oracle::vertex_enumeration_min(prob);
      if (std::abs(s.objective - best) > 1e-8 * (1.0 + std::abs(best))) ++enum_failures;
    }
  }
  return {gap_failures == 0 && enum_failures == 0 && not_optimal == 0,
          fmt("worst relative gap %.2e (<= 1e-8), %d non-optimal, vertex enumeration %d/%d agree", worst_gap,
              not_optimal, enum_checked - enum_failures, enum_checked)};
}

// 6. The counterpart bound dominates the scenario search, which tightens with more scenarios.
Outcome weak_duality() {
  Rng rng(6);
  int violations = 0;
  std::vector<double> gap10, gap1000;
  for (int trial = 0; trial < 100; ++trial) {
    const GridSpec g = oracle::make_grid(3, 3);
    std::vector<conformal::ObjectUncertainty> sets{oracle::random_set(g, rng, static_cast<int>(rng.below(2)))};
    std::vector<robust::ObjectPolytopes> polys{robust::make_polytopes(sets[0])};
    const AgentPath path = oracle::random_path(g, 3, rng);
    robust::CounterpartInput in;
    in.grid = g;
    in.path = path;
    in.objects = {&polys[0]};
    in.initial = {initial_belief(g)};
    const double bound = robust::solve_counterpart(in, robust::Method::FixedBelief).value;
    const std::uint64_t seed = rng.next();
    const double s10 = robust::inner_max_scenario(g, path, sets, in.initial, {.n_scenarios = 10}, seed).value;
    const double s1000 = robust::inner_max_scenario(g, path, sets, in.initial, {.n_scenarios = 1000}, seed).value;
    if (bound < s1000 - 1e-6) ++violations;
    gap10.push_back(bound - s10);
    gap1000.push_back(bound - s1000);
  }
  const double m10 = median(gap10), m1000 = median(gap1000);
  return {violations == 0 && m1000 <= m10,
          fmt("%d bound violations; median gap %.4g at S=1000 vs %.4g at S=10", violations, m1000, m10)};
}

// 7. Envelope gradients against central differences.
Outcome gradients() {
  Rng rng(707);
  int checked = 0, failures = 0;
  double worst = 0.0;
  auto optimum = [](const lp::Problem& p) { return lp::solve(p).objective; };
  auto check = [&](double fd, double g) {
    const double rel = std::abs(fd - g) / std::max(1.0, std::abs(fd));
    worst = std::max(worst, rel);
    if (rel > 1e-4) ++failures;
  };
  while (checked < 200) {
    const int n = 2 + static_cast<int>(rng.below(12)), m = 1 + static_cast<int>(rng.below(12));
    const int q = static_cast<int>(rng.below(3));
    const auto p = oracle::random_feasible_lp(rng, n, m, q);
    const auto s = lp::solve(p);
    if (s.status != lp::Status::Optimal || s.degenerate) continue;
    ++checked;
    const auto g = lp_value_gradient(p, s);
    for (int i = 0; i < m; ++i) {
      const double h = 1e-5 * (1.0 + std::abs(p.ineq_rhs[i]));
      lp::Problem hi = p, lo = p;
      hi.ineq_rhs[i] += h;
      lo.ineq_rhs[i] -= h;
      check((optimum(hi) - optimum(lo)) / (2 * h), g.d_value_d_rhs[i]);
    }
    for (int i = 0; i < q; ++i) {
      const double h = 1e-5 * (1.0 + std::abs(p.eq_rhs[i]));
      lp::Problem hi = p, lo = p;
      hi.eq_rhs[i] += h;
      lo.eq_rhs[i] -= h;
      check((optimum(hi) - optimum(lo)) / (2 * h), g.d_value_d_eq_rhs[i]);
    }
    for (int j = 0; j < n; ++j) {
      const double h = 1e-5 * (1.0 + std::abs(p.cost[j]));
      lp::Problem hi = p, lo = p;
      hi.cost[j] += h;
      lo.cost[j] -= h;
      check((optimum(hi) - optimum(lo)) / (2 * h), g.d_value_d_cost[j]);
    }
  }
  return {failures == 0, fmt("%d LPs, %d components above 1e-4 (largest relative error %.2e)", checked, failures, worst)};
}

// 8. Indicator basis exactness and Gaussian basis planner speedup.
Outcome basis() {
  Rng rng(88);
  double worst = 0.0;
  for (int e = 2; e <= 6; ++e) {
    const GridSpec g = oracle::make_grid(e, 4);
    const int V = g.cells();
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix m = random_stochastic(rng, V);
      BasisExpansion ex(g, BasisKind::Indicator, V, m);
      Vector b = Vector::Zero(V + 1);
      b.tail(V) = dirichlet_rows(1, V, rng).transpose();
      const Vector dense = propagate(b, m);
      const Vector via = ex.reconstruct(basis_propagate(ex, ex.project(b.tail(V))));
      worst = std::max(worst, (dense - via).cwiseAbs().maxCoeff());
      const AgentPath path = oracle::random_path(g, 4, rng);
      const auto seq = rollout(g, path, m);
      const auto cap = basis_capture(ex, g, path, initial_belief(g));
      for (std::size_t t = 0; t < seq.size(); ++t) worst = std::max(worst, std::abs(seq[t][0] - cap[t]));
    }
  }
  const GridSpec g = oracle::make_grid(15, 8);
  const auto pair = draw_pair(g, DynamicsFamily::Drift, 0.3, rng);
  robust::PlanOptions opt;
  opt.threads = 1;
  auto time_plan = [&](const robust::PathEvaluator& ev) {
    std::vector<double> ms;
    for (int r = 0; r < 5; ++r) ms.push_back(robust::plan(g, ev, opt).wall_ms);
    return median(ms);
  };
  const robust::ModelEvaluator dense(g, {pair.truth}, {});
  const robust::BasisModelEvaluator fast(g, {pair.truth}, {}, BasisKind::Gaussian, 16);
  const double t_dense = time_plan(dense), t_basis = time_plan(fast);
  const double speedup = t_dense / t_basis;
  return {worst <= 1e-10 && speedup >= 5.0,
          fmt("indicator K=V max deviation %.2e (<= 1e-10); E=15 tau=8 plan %.1f ms dense vs %.1f ms basis, "
              "speedup %.1fx (>= 5x)",
              worst, t_dense, t_basis, speedup)};
}

// 9. Counterpart planner wall time bounds and growth in E.
Outcome scaling() {
  sim::ScalingConfig c;
  c.edges = {3, 4, 5};
  c.horizons = {4};
  c.repeats = 10;
  c.threads = 1;
  const auto rows = sim::bench_scaling(c);
  c.edges = {5};
  c.horizons = {6};
  const auto big = sim::bench_scaling(c);
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i) monotone = monotone && rows[i].median_ms >= rows[i - 1].median_ms;
  const double t34 = rows[0].median_ms, t56 = big[0].median_ms;
  return {t34 < 1000.0 && t56 < 10000.0 && monotone,
          fmt("median (E=3,tau=4) %.1f ms (< 1 s), (E=5,tau=6) %.1f ms (< 10 s); tau=4 medians %.1f, %.1f, %.1f ms "
              "for E=3,4,5 %s",
              t34, t56, rows[0].median_ms, rows[1].median_ms, rows[2].median_ms,
              monotone ? "nondecreasing" : "NOT nondecreasing")};
}

// 10. Paired behavioural benchmark.
Outcome behaviour() {
  sim::SuiteConfig c;
  c.episode.grid = oracle::make_grid(5, 3);
  c.episode.m = 2;
  c.episode.k = 2;
  c.episode.max_steps = 4 * 5;
  c.episodes = 500;
  c.seed = 1;
  const auto rep = sim::benchmark_suite(c);
  auto success = [&](sim::PolicyKind k) {
    for (const auto& s : rep.summary)
      if (s.policy == k) return s.success.mean;
    return -1.0;
  };
  const double neuro = success(sim::PolicyKind::Neuro), rnd = success(sim::PolicyKind::Random);
  const double greedy = success(sim::PolicyKind::GreedyBelief);
  const auto t = sim::paired_success_test(rep, sim::PolicyKind::Neuro, sim::PolicyKind::Random);
  const bool pass = neuro > rnd && t.p_value < 0.01 && neuro >= greedy;
  return {pass, fmt("success neuro %.3f, random %.3f (paired p = %.2e < 0.01), greedy-belief %.3f", neuro, rnd,
                    t.p_value, greedy)};
}

// 11. Prediction error grows with coverage alpha.
Outcome prediction_trend() {
  sim::PredictionSuiteConfig c;
  c.grid = oracle::make_grid(5, 1);
  const auto rows = sim::prediction_error_suite(c);
  bool monotone = true;
  std::string means;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0) monotone = monotone && rows[i].mean >= rows[i - 1].mean;
    means += fmt("%s%.4f@%.2f", i ? ", " : "", rows[i].mean, rows[i].coverage_alpha);
  }
  return {monotone, "mean error " + means + (monotone ? " nondecreasing" : " NOT nondecreasing")};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 12. Every CLI subcommand is byte-reproducible.
Outcome determinism(const std::string& cli) {
  if (cli.empty()) return {false, "no CLI path given"};
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("robustnav_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  struct Case {
    std::string name;
    std::string args;
    std::vector<std::string> files;  // written by the command, compared too
  };
  const std::vector<Case> cases = {
      {"calibrate", "calibrate --seed 3 --trials 5 --test-points 200", {}},
      {"plan", "plan --seed 3 --edge 3 --horizon 2 --belief-csv {dir}/beliefs.csv --dump-lp {dir}/lp.txt",
       {"beliefs.csv", "lp.txt"}},
      {"simulate", "simulate --seed 3 --policy neuro", {}},
      {"evaluate", "evaluate --seed 3 --episodes 10 --episodes-csv {dir}/episodes.csv --tests-csv {dir}/tests.csv",
       {"episodes.csv", "tests.csv"}},
      {"evaluate-prediction", "evaluate --suite prediction --seed 3 --instances 10 --calibration-points 50", {}},
      {"bench", "bench --seed 3 --edges 3 --horizons 2 --repeats 2", {}},
  };
  std::string report;
  bool all = true;
  for (const auto& c : cases) {
    std::string args = c.args;
    for (std::size_t at; (at = args.find("{dir}")) != std::string::npos;) args.replace(at, 5, dir.string());
    std::vector<std::string> runs[2];
    bool ran = true;
    for (int r = 0; r < 2; ++r) {
      const fs::path out = dir / (c.name + ".out");
      const std::string cmd = "\"" + cli + "\" " + args + " --out " + out.string() + " 2>/dev/null";
      if (std::system(cmd.c_str()) != 0) ran = false;
      runs[r].push_back(slurp(out));
      for (const auto& f : c.files) runs[r].push_back(slurp(dir / f));
    }
    const bool same = ran && runs[0] == runs[1] && !runs[0][0].empty();
    all = all && same;
    report += fmt("%s%s %s", report.empty() ? "" : ", ", c.name.c_str(), same ? "identical" : (ran ? "DIFFERS" : "FAILED"));
  }
  fs::remove_all(dir);
  return {all, report};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  std::set<int> only;
  for (int i = 2; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"conformal coverage", coverage},
      {"score network convexity", convexity},
      {"belief invariants", belief_invariants},
      {"epigraph soundness", epigraph},
      {"LP certificates", lp_certificates},
      {"weak-duality ordering", weak_duality},
      {"envelope gradients", gradients},
      {"basis exactness and speedup", basis},
      {"planner scaling", scaling},
      {"behavioural benchmark", behaviour},
      {"prediction-error trend", prediction_trend},
      {"CLI determinism", [&] { return determinism(cli); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
