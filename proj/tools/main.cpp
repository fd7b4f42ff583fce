// robustnav command line: calibrate, plan, simulate, evaluate, bench.
//
// Every option can also come from a JSON file given with --config. Keys use
// underscores (beam_width for --beam-width) and may be grouped in sections
// (grid, task, planner, calibration, episode, suite, bench, seeds), which are
// flattened. Flags given on the command line override the file.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "robustnav/counterpart.hpp"
#include "robustnav/lp.hpp"
#include "robustnav/planner.hpp"
#include "robustnav/suite.hpp"

using namespace robustnav;
using json = nlohmann::json;

namespace {

struct Settings {
  std::uint64_t seed = 0;
  int threads = 0;
  bool timings = false;
  std::string out = "-";

  int edge = 3;
  int horizon = 2;
  double gamma = 0.9;
  double max_step = 1.0;

  std::string family;  // empty: command default
  double noise = std::numeric_limits<double>::quiet_NaN();  // NaN: command default
  int calibration_points = 200;
  double alpha = 0.1;
  std::string score = "l1";
  int hidden = 4;
  std::string params;
  std::string scores_csv;
  double q = std::numeric_limits<double>::quiet_NaN();
  int trials = 20;
  int test_points = 500;
  std::string save_params;

  int objects = 1;
  std::string task = "umon";
  std::string method = "counterpart";
  std::string search = "beam";
  int beam_width = 32;
  int scenarios = 64;
  int basis_k = 16;
  double length_weight = 0.05;
  bool literal_smon = false;
  std::string dump_lp;
  std::string belief_csv;

  int m = 1;
  int k = 1;
  std::string policy = "neuro";
  int max_steps = 20;
  bool moving = false;
  std::string observation = "proximity";
  double blend_lambda = 0.0;

  std::string suite = "behavior";
  int episodes = 100;
  std::string policies = "neuro,random,greedy-belief";
  std::string episodes_csv;
  std::string tests_csv;
  std::string alphas = "0.01,0.05,0.1,0.2";
  int instances = 200;
  int steps = 10;
  double test_noise = -1.0;
  double drift_shift = 0.8;

  std::string edges = "3,4,5";
  std::string horizons = "4";
  std::string variant = "counterpart";
  int repeats = 10;
};

using Slot = std::variant<int*, double*, bool*, std::string*, std::uint64_t*>;

struct Field {
  std::string key;
  Slot slot;
  std::string help;
};

std::vector<Field> fields(Settings& s) {
  return {
      {"seed", &s.seed, "master seed"},
      {"threads", &s.threads, "worker threads (0: ROBUSTNAV_THREADS or all cores)"},
      {"timings", &s.timings, "report wall times (output is no longer reproducible)"},
      {"out", &s.out, "output file, - for stdout"},
      {"edge", &s.edge, "grid edge E"},
      {"horizon", &s.horizon, "planning horizon tau"},
      {"gamma", &s.gamma, "discount"},
      {"max_step", &s.max_step, "step length of a move"},
      {"family", &s.family, "dynamics family: drift, random-walk, stationary"},
      {"noise", &s.noise, "sampler noise level"},
      {"calibration_points", &s.calibration_points, "synthetic calibration pairs"},
      {"alpha", &s.alpha, "coverage alpha"},
      {"score", &s.score, "score network: l1 or random"},
      {"hidden", &s.hidden, "hidden width of the random score network"},
      {"params", &s.params, "score network parameter file (overrides --score)"},
      {"scores_csv", &s.scores_csv, "calibration scores, one per line"},
      {"q", &s.q, "threshold; skips calibration"},
      {"trials", &s.trials, "coverage trials"},
      {"test_points", &s.test_points, "test pairs per coverage trial"},
      {"save_params", &s.save_params, "write the score network parameters to this file"},
      {"objects", &s.objects, "objects to plan for"},
      {"task", &s.task, "umon or smon"},
      {"method", &s.method, "counterpart, alternating, scenario, model or basis"},
      {"search", &s.search, "beam or exhaustive"},
      {"beam_width", &s.beam_width, "beam width (<= 0: unlimited)"},
      {"scenarios", &s.scenarios, "scenario members per object"},
      {"basis_k", &s.basis_k, "Gaussian basis size"},
      {"length_weight", &s.length_weight, "S-MON path length weight"},
      {"literal_smon", &s.literal_smon, "add the S-MON length term instead of subtracting it"},
      {"dump_lp", &s.dump_lp, "write the assembled dual LP at the planned path to this file"},
      {"belief_csv", &s.belief_csv, "write per-step beliefs of the planned path to this file"},
      {"m", &s.m, "targets"},
      {"k", &s.k, "objects placed (targets plus distractors)"},
      {"policy", &s.policy, "neuro, random or greedy-belief"},
      {"max_steps", &s.max_steps, "episode step budget"},
      {"moving", &s.moving, "objects follow their true dynamics"},
      {"observation", &s.observation, "proximity or same-cell"},
      {"blend_lambda", &s.blend_lambda, "probability of the network stand-in action"},
      {"suite", &s.suite, "behavior or prediction"},
      {"episodes", &s.episodes, "episodes per policy"},
      {"policies", &s.policies, "comma-separated policies"},
      {"episodes_csv", &s.episodes_csv, "write per-episode rows to this file"},
      {"tests_csv", &s.tests_csv, "write paired success tests to this file"},
      {"alphas", &s.alphas, "comma-separated coverage alphas"},
      {"instances", &s.instances, "prediction suite instances"},
      {"steps", &s.steps, "prediction suite steps per instance"},
      {"test_noise", &s.test_noise, "prediction suite test noise (< 0: --noise)"},
      {"drift_shift", &s.drift_shift, "prediction suite off-direction drift share"},
      {"edges", &s.edges, "comma-separated grid edges"},
      {"horizons", &s.horizons, "comma-separated horizons"},
      {"variant", &s.variant, "counterpart, dense or basis"},
      {"repeats", &s.repeats, "timed repeats per grid point"},
  };
}

const std::map<std::string, std::vector<std::string>> kCommandKeys = {
    {"calibrate",
     {"seed", "threads", "out", "edge", "family", "noise", "calibration_points", "alpha", "score", "hidden", "params",
      "scores_csv", "trials", "test_points", "save_params"}},
    {"plan",
     {"seed", "threads", "timings", "out", "edge", "horizon", "gamma", "max_step", "family", "noise",
      "calibration_points", "alpha", "score", "hidden", "params", "scores_csv", "q", "objects", "task", "method",
      "search", "beam_width", "scenarios", "basis_k", "length_weight", "literal_smon", "dump_lp", "belief_csv"}},
    {"simulate",
     {"seed", "out", "edge", "horizon", "gamma", "family", "noise", "calibration_points", "alpha", "score", "hidden",
      "params", "scores_csv", "q", "task", "beam_width", "scenarios", "m", "k", "policy", "max_steps", "moving",
      "observation", "blend_lambda"}},
    {"evaluate",
     {"seed", "threads", "timings", "out", "edge", "horizon", "gamma", "family", "noise", "calibration_points", "alpha",
      "score", "task", "beam_width", "scenarios", "m", "k", "max_steps", "moving", "observation", "blend_lambda",
      "suite", "episodes", "policies", "episodes_csv", "tests_csv", "alphas", "instances", "steps", "test_noise",
      "drift_shift"}},
    {"bench",
     {"seed", "threads", "timings", "out", "edges", "horizons", "variant", "objects", "repeats", "beam_width",
      "basis_k", "hidden"}},
};

const std::vector<std::string> kSections = {"grid",    "task",  "planner", "calibration",
                                            "episode", "suite", "bench",   "seeds"};

void apply_json(Settings& s, const json& j) {
  auto table = fields(s);
  for (const auto& [key, value] : j.items()) {
    if (value.is_object() && std::find(kSections.begin(), kSections.end(), key) != kSections.end()) {
      apply_json(s, value);
      continue;
    }
    auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
    if (it == table.end()) throw InvalidArgument("config: unknown key '" + key + "'");
    std::visit([&](auto* p) { *p = value.get<std::remove_pointer_t<decltype(p)>>(); }, it->slot);
  }
}

std::string flag_name(std::string key) {
  for (char& c : key)
    if (c == '_') c = '-';
  return "--" + key;
}

template <class T>
std::vector<T> split_list(const std::string& text) {
  std::vector<T> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::istringstream conv(item);
    T v{};
    if (!(conv >> v)) throw InvalidArgument("cannot parse list item '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw InvalidArgument("cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::ofstream open_file(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open '" + path + "' for writing");
  return f;
}

GridSpec make_grid(const Settings& s) {
  GridSpec g;
  g.edge = s.edge;
  g.horizon = s.horizon;
  g.gamma = s.gamma;
  g.max_step = s.max_step;
  g.validate();
  return g;
}

std::shared_ptr<const picnn::Params> score_network(const Settings& s, const GridSpec& g) {
  if (!s.params.empty()) return std::make_shared<const picnn::Params>(picnn::load_file(s.params));
  return sim::make_score_network(s.score, g, Rng::derive(s.seed, 0xC0FFEE), s.hidden);
}

std::vector<double> read_scores(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open scores file '" + path + "'");
  std::vector<double> scores;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      scores.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw InvalidArgument("scores file: cannot parse '" + line + "'");
    }
  }
  return scores;
}

sim::ScoreModel score_model(const Settings& s, const GridSpec& g) {
  auto net = score_network(s, g);
  if (!std::isnan(s.q)) return {net, s.q};
  if (!s.scores_csv.empty()) return {net, conformal::calibrate(read_scores(s.scores_csv), s.alpha)};
  const auto pairs = sim::draw_pairs(g, parse_family(s.family), s.noise, s.calibration_points, Rng::derive(s.seed, 0xCA11B));
  return sim::calibrate_score(net, pairs, s.alpha);
}

json number(double x) { return std::isfinite(x) ? json(x) : json(x > 0 ? "inf" : (x < 0 ? "-inf" : "nan")); }

int cmd_calibrate(const Settings& s) {
  GridSpec g;
  g.edge = s.edge;
  g.validate();
  auto net = score_network(s, g);
  if (!s.save_params.empty()) picnn::save_file(*net, s.save_params);
  json out;
  out["coverage_alpha"] = s.alpha;
  if (!s.scores_csv.empty()) {
    const auto scores = read_scores(s.scores_csv);
    out["source"] = s.scores_csv;
    out["n"] = scores.size();
    out["rank"] = conformal::quantile_rank(scores.size(), s.alpha);
    out["q"] = number(conformal::calibrate(scores, s.alpha));
  } else {
    const auto family = parse_family(s.family);
    const auto pairs = sim::draw_pairs(g, family, s.noise, s.calibration_points, Rng::derive(s.seed, 0xCA11B));
    const auto sm = sim::calibrate_score(net, pairs, s.alpha);
    out["source"] = "synthetic";
    out["n"] = pairs.size();
    out["rank"] = conformal::quantile_rank(pairs.size(), s.alpha);
    out["q"] = number(sm.q);
    if (s.trials > 0) {
      const SyntheticSampler sampler(g, family, s.noise, s.seed);
      const auto rep = conformal::empirical_coverage(*net, sampler.as_conformal(), s.alpha, s.calibration_points,
                                                     s.test_points, s.trials, Rng::derive(s.seed, 7));
      out["coverage"] = {{"trials", s.trials},
                         {"test_points", s.test_points},
                         {"mean", rep.mean},
                         {"std_error", rep.std_error},
                         {"infinite_q", rep.infinite_q},
                         {"lower", 1.0 - s.alpha},
                         {"upper", 1.0 - s.alpha + 1.0 / (s.calibration_points + 1.0)}};
    }
  }
  Output o(s.out);
  o.stream() << out.dump(2) << "\n";
  return 0;
}

json path_json(const AgentPath& path) {
  json a = json::array();
  for (const auto& p : path) a.push_back({p.x(), p.y()});
  return a;
}

int cmd_plan(const Settings& s) {
  const GridSpec g = make_grid(s);
  const auto sm = score_model(s, g);
  const auto pairs = sim::draw_pairs(g, parse_family(s.family), s.noise, s.objects, Rng::derive(s.seed, 2));
  std::vector<conformal::ObjectUncertainty> sets;
  std::vector<Matrix> nominal;
  for (const auto& p : pairs) {
    sets.push_back(sim::object_set(sm, p));
    nominal.push_back(p.nominal);
  }
  std::unique_ptr<robust::PathEvaluator> ev;
  const robust::CounterpartEvaluator* counterpart = nullptr;
  if (s.method == "counterpart" || s.method == "alternating") {
    auto c = std::make_unique<robust::CounterpartEvaluator>(
        g, sets, std::vector<Vector>{},
        s.method == "counterpart" ? robust::Method::FixedBelief : robust::Method::Alternating);
    counterpart = c.get();
    ev = std::move(c);
  } else if (s.method == "scenario") {
    ev = std::make_unique<robust::ScenarioEvaluator>(g, sets, std::vector<Vector>{},
                                                     robust::ScenarioOptions{.n_scenarios = s.scenarios},
                                                     Rng::derive(s.seed, 3));
  } else if (s.method == "model") {
    ev = std::make_unique<robust::ModelEvaluator>(g, nominal, std::vector<Vector>{});
  } else if (s.method == "basis") {
    ev = std::make_unique<robust::BasisModelEvaluator>(g, nominal, std::vector<Vector>{}, BasisKind::Gaussian,
                                                       std::min(s.basis_k, g.cells()));
  } else {
    throw InvalidArgument("unknown method '" + s.method + "' (expected counterpart, alternating, scenario, model or basis)");
  }
  robust::PlanOptions opt;
  opt.task = robust::parse_task(s.task);
  opt.search = robust::parse_search(s.search);
  opt.beam_width = s.beam_width;
  opt.length_weight = s.length_weight;
  opt.literal_smon = s.literal_smon;
  opt.threads = s.threads;
  const auto res = robust::plan(g, *ev, opt);

  json out;
  out["method"] = s.method;
  out["task"] = s.task;
  out["q"] = number(sm.q);
  out["path"] = path_json(res.path);
  out["moves"] = res.moves;
  out["robust_value"] = res.robust_value;
  out["capture"] = res.capture;
  out["evaluations"] = res.evaluations;
  out["lp_solves"] = res.lp_solves;
  if (s.timings) out["wall_ms"] = res.wall_ms;
  Output o(s.out);
  o.stream() << out.dump(2) << "\n";

  if (!s.belief_csv.empty()) {
    auto f = open_file(s.belief_csv);
    write_belief_csv(f, res.beliefs);
  }
  if (!s.dump_lp.empty()) {
    if (!counterpart) throw InvalidArgument("--dump-lp needs --method counterpart or alternating");
    robust::CounterpartInput in;
    in.grid = g;
    in.path = res.path;
    std::vector<std::vector<Vector>> frozen;
    for (const auto& poly : counterpart->polytopes()) {
      in.objects.push_back(&poly);
      in.initial.push_back(initial_belief(g));
      frozen.push_back(robust::belief_envelope(g, res.path, poly, in.initial.back()));
    }
    const auto rc = robust::build_dual_counterpart(in, frozen);
    auto f = open_file(s.dump_lp);
    lp::dump(rc.dual, f);
  }
  return 0;
}

sim::EpisodeConfig episode_config(const Settings& s) {
  sim::EpisodeConfig c;
  c.grid = make_grid(s);
  c.m = s.m;
  c.k = std::max(s.k, s.m);
  c.task = robust::parse_task(s.task);
  c.family = parse_family(s.family);
  c.noise = s.noise;
  c.moving_targets = s.moving;
  c.observation = sim::parse_observation(s.observation);
  c.max_steps = s.max_steps;
  c.blend_lambda = s.blend_lambda;
  c.beam_width = s.beam_width;
  c.scenarios = s.scenarios;
  return c;
}

json episode_json(const sim::EpisodeResult& r) {
  json actions = json::array();
  for (auto a : r.actions) actions.push_back(to_string(a));
  return {{"actions", actions},         {"agent_cells", r.agent_cells}, {"object_cells", r.object_cells},
          {"found_step", r.found_step}, {"success", r.success},         {"wrong_found", r.wrong_found},
          {"progress", r.progress},     {"spl", r.spl},                 {"ppl", r.ppl},
          {"steps", r.steps},           {"shortest", r.shortest},       {"traveled", r.traveled}};
}

int cmd_simulate(const Settings& s) {
  const auto c = episode_config(s);
  const auto kind = sim::parse_policy(s.policy);
  sim::ScoreModel sm;
  if (kind == sim::PolicyKind::Neuro) sm = score_model(s, c.grid);
  auto policy = sim::make_policy(kind, sm);
  const auto r = sim::run_episode(c, *policy, s.seed);
  json out = episode_json(r);
  out["policy"] = s.policy;
  out["q"] = number(sm.q);
  Output o(s.out);
  o.stream() << out.dump(2) << "\n";
  return 0;
}

int cmd_evaluate(const Settings& s) {
  Output o(s.out);
  if (s.suite == "prediction") {
    sim::PredictionSuiteConfig c;
    c.grid = make_grid(s);
    c.alphas = split_list<double>(s.alphas);
    c.family = parse_family(s.family);
    c.noise = s.noise;
    c.test_noise = s.test_noise;
    c.drift_shift = s.drift_shift;
    c.calibration_points = s.calibration_points;
    c.instances = s.instances;
    c.steps = s.steps;
    c.seed = s.seed;
    auto& out = o.stream();
    out << "coverage_alpha,q,mean,variance\n";
    char buf[160];
    for (const auto& r : sim::prediction_error_suite(c)) {
      std::snprintf(buf, sizeof buf, "%.6g,%.9f,%.9f,%.9f\n", r.coverage_alpha, r.q, r.mean, r.variance);
      out << buf;
    }
    return 0;
  }
  if (s.suite != "behavior") throw InvalidArgument("unknown suite '" + s.suite + "' (expected behavior or prediction)");
  sim::SuiteConfig c;
  c.episode = episode_config(s);
  c.policies.clear();
  for (const auto& name : split_names(s.policies)) c.policies.push_back(sim::parse_policy(name));
  c.episodes = s.episodes;
  c.seed = s.seed;
  c.score = s.score;
  c.coverage_alpha = s.alpha;
  c.calibration_points = s.calibration_points;
  c.threads = s.threads;
  const auto rep = sim::benchmark_suite(c);
  sim::write_summary_csv(o.stream(), rep);
  if (!s.episodes_csv.empty()) {
    auto f = open_file(s.episodes_csv);
    sim::write_episode_csv(f, rep, s.timings);
  }
  if (!s.tests_csv.empty()) {
    auto f = open_file(s.tests_csv);
    f << "policy_a,policy_b,both,only_a,only_b,neither,p_value\n";
    char buf[64];
    for (std::size_t a = 0; a < c.policies.size(); ++a)
      for (std::size_t b = a + 1; b < c.policies.size(); ++b) {
        const auto t = sim::paired_success_test(rep, c.policies[a], c.policies[b]);
        std::snprintf(buf, sizeof buf, "%.6e", t.p_value);
        f << to_string(c.policies[a]) << ',' << to_string(c.policies[b]) << ',' << t.both << ',' << t.only_a << ','
          << t.only_b << ',' << t.neither << ',' << buf << '\n';
      }
  }
  return 0;
}

int cmd_bench(const Settings& s) {
  sim::ScalingConfig c;
  c.edges = split_list<int>(s.edges);
  c.horizons = split_list<int>(s.horizons);
  c.variant = sim::parse_scaling_variant(s.variant);
  c.objects = s.objects;
  c.repeats = s.repeats;
  c.beam_width = s.beam_width;
  c.basis_k = s.basis_k;
  c.hidden = s.hidden;
  c.seed = s.seed;
  c.threads = s.threads;
  Output o(s.out);
  sim::write_scaling_csv(o.stream(), sim::bench_scaling(c), s.timings);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust object-search planning on a gridworld"};
  app.require_subcommand(1);
  Settings parsed;
  std::map<std::string, std::map<std::string, CLI::Option*>> options;
  std::map<std::string, std::string> config_path;
  auto table = fields(parsed);
  const std::map<std::string, std::string> descriptions = {
      {"calibrate", "Calibrate the conformal threshold and report coverage (JSON)"},
      {"plan", "Plan a robust search path (JSON, optional belief CSV and LP dump)"},
      {"simulate", "Run one episode (JSON)"},
      {"evaluate", "Run the behavioural or prediction-error suite (CSV)"},
      {"bench", "Time plan() over grid sizes (CSV)"}};
  for (const auto& [name, keys] : kCommandKeys) {
    CLI::App* sub = app.add_subcommand(name, descriptions.at(name));
    sub->add_option("--config", config_path[name], "JSON config file");
    for (const auto& key : keys) {
      const auto& f = *std::find_if(table.begin(), table.end(), [&](const Field& x) { return x.key == key; });
      CLI::Option* opt = std::visit(
          [&](auto* p) -> CLI::Option* {
            if constexpr (std::is_same_v<decltype(p), bool*>)
              return sub->add_flag(flag_name(key), *p, f.help);
            else
              return sub->add_option(flag_name(key), *p, f.help);
          },
          f.slot);
      options[name][key] = opt;
    }
  }
  CLI11_PARSE(app, argc, argv);

  try {
    const std::string cmd = app.get_subcommands().front()->get_name();
    // Episode commands default to the benchmark world: E = 5, two static targets.
    Settings s;
    if (cmd == "simulate" || cmd == "evaluate") {
      s.edge = 5;
      s.horizon = 3;
      s.scenarios = 16;
      s.beam_width = 16;
      s.m = 2;
      s.k = 2;
    }
    if (!config_path[cmd].empty()) {
      std::ifstream in(config_path[cmd]);
      if (!in) throw InvalidArgument("cannot open config '" + config_path[cmd] + "'");
      apply_json(s, json::parse(in));
    }
    auto target = fields(s);
    auto source = fields(parsed);
    for (std::size_t i = 0; i < target.size(); ++i) {
      const auto it = options[cmd].find(target[i].key);
      if (it == options[cmd].end() || it->second->count() == 0) continue;
      std::visit([&](auto* dst) { *dst = *std::get<decltype(dst)>(source[i].slot); }, target[i].slot);
    }
    // Episodes use static targets with nearly stationary models; calibration,
    // planning and the prediction suite use drifting objects.
    const bool episodes = cmd == "simulate" || (cmd == "evaluate" && s.suite == "behavior");
    if (s.family.empty()) s.family = episodes ? "stationary" : "drift";
    if (std::isnan(s.noise)) s.noise = episodes ? 0.1 : 0.3;
    if (cmd == "calibrate") return cmd_calibrate(s);
    if (cmd == "plan") return cmd_plan(s);
    if (cmd == "simulate") return cmd_simulate(s);
    if (cmd == "evaluate") return cmd_evaluate(s);
    return cmd_bench(s);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
