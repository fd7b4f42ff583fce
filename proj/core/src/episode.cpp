#include "robustnav/episode.hpp"

#include <algorithm>
#include <numbers>

#include "robustnav/metrics.hpp"
#include "robustnav/scenario.hpp"

namespace robustnav::sim {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Neuro: return "neuro";
    case PolicyKind::Random: return "random";
    case PolicyKind::GreedyBelief: return "greedy-belief";
  }
  return "?";
}

std::string to_string(Observation mode) { return mode == Observation::SameCell ? "same-cell" : "proximity"; }

Observation parse_observation(const std::string& name) {
  if (name == "same-cell") return Observation::SameCell;
  if (name == "proximity") return Observation::Proximity;
  throw InvalidArgument("unknown observation model '" + name + "' (expected same-cell or proximity)");
}

PolicyKind parse_policy(const std::string& name) {
  if (name == "neuro") return PolicyKind::Neuro;
  if (name == "random") return PolicyKind::Random;
  if (name == "greedy-belief") return PolicyKind::GreedyBelief;
  throw InvalidArgument("unknown policy '" + name + "' (expected neuro, random or greedy-belief)");
}

void EpisodeConfig::validate() const {
  grid.validate();
  const int V = grid.cells();
  if (m < 1 || k < m) throw InvalidArgument("episode: need 1 <= m <= k");
  if (k >= V) throw InvalidArgument("episode: more objects than free cells");
  if (max_steps < 1) throw InvalidArgument("episode: max_steps must be >= 1");
  if (grid.horizon < 1) throw InvalidArgument("episode: planning horizon must be >= 1");
  if (!truth.empty() && static_cast<int>(truth.size()) != k) throw InvalidArgument("episode: one truth matrix per object");
  for (const auto& t : truth) check_transition(t, V);
  if (!object_cells.empty()) {
    if (static_cast<int>(object_cells.size()) != k) throw InvalidArgument("episode: one cell per object");
    for (int c : object_cells)
      if (c < 0 || c >= V) throw InvalidArgument("episode: object cell out of range");
  }
  if (start_cell >= V) throw InvalidArgument("episode: start cell out of range");
  if (!(blend_lambda >= 0.0 && blend_lambda <= 1.0)) throw InvalidArgument("episode: blend_lambda must lie in [0, 1]");
  if (task == robust::Task::SMON && m < 1) throw InvalidArgument("episode: S-MON needs a target");
}

void Policy::reset(const EpisodeConfig&, const std::vector<CalibrationPair>&, Rng&) {}

Action RandomPolicy::act(const EpisodeConfig&, const AgentState&, Rng& rng) {
  return static_cast<Action>(rng.below(kActions));
}

namespace {

double heading_angle(int heading) { return heading * 0.5 * std::numbers::pi; }

double capture_here(const AgentState& s) {
  double best = 0.0;
  for (const auto& p : s.posterior) best = std::max(best, p[s.cell]);
  return best;
}

// Cell of the nearest active target whose posterior reaches the FOUND
// threshold, or -1.
int nearest_localized(const EpisodeConfig& config, const AgentState& s) {
  const int E = config.grid.edge;
  int best = -1, best_dist = 0;
  for (const auto& p : s.posterior) {
    Eigen::Index v = 0;
    if (p.maxCoeff(&v) < config.found_threshold) continue;
    const int d = std::abs(static_cast<int>(v) % E - s.cell % E) + std::abs(static_cast<int>(v) / E - s.cell / E);
    if (best < 0 || d < best_dist) {
      best = static_cast<int>(v);
      best_dist = d;
    }
  }
  return best;
}

// Unit axis step toward `goal` that shortens the distance, the heading's
// direction first, then the fewest turns.
Point toward(const GridSpec& g, int from, int goal, int heading) {
  const int E = g.edge;
  const int dx = goal % E - from % E, dy = goal / E - from / E;
  const int hx[] = {1, 0, -1, 0}, hy[] = {0, 1, 0, -1};
  int best = -1, best_turns = 0;
  for (int k = 0; k < 4; ++k) {
    if (hx[k] * dx + hy[k] * dy <= 0) continue;
    const int turns = std::min((k - heading + 4) % 4, (heading - k + 4) % 4);
    if (best < 0 || turns < best_turns) {
      best = k;
      best_turns = turns;
    }
  }
  return best < 0 ? Point(0, 0) : Point(hx[best], hy[best]);
}

}  // namespace

Action GreedyBeliefPolicy::act(const EpisodeConfig& config, const AgentState& state, Rng&) {
  const GridSpec& g = config.grid;
  const int E = g.edge;
  if (capture_here(state) >= config.found_threshold) return Action::Found;
  Vector total = Vector::Zero(g.cells());
  for (const auto& p : state.posterior) total += p;
  int target = -1;
  int target_dist = 0;
  for (int v = 0; v < g.cells(); ++v) {
    const int d = std::abs(v % E - state.cell % E) + std::abs(v / E - state.cell / E);
    if (target < 0 || total[v] > total[target] || (total[v] == total[target] && d < target_dist)) {
      target = v;
      target_dist = d;
    }
  }
  const int dx = target % E - state.cell % E, dy = target / E - state.cell / E;
  if (dx == 0 && dy == 0) return Action::TurnLeft;
  const Point step = std::abs(dx) >= std::abs(dy) ? Point(dx > 0 ? 1 : -1, 0) : Point(0, dy > 0 ? 1 : -1);
  const Point here = g.center(state.cell);
  return task_action_offset({here, here + step}, heading_angle(state.heading));
}

void NeuroPolicy::reset(const EpisodeConfig& config, const std::vector<CalibrationPair>& pairs, Rng& rng) {
  models_.clear();
  const GridSpec& g = config.grid;
  const AgentPath stay(g.horizon + 1, g.center(config.start()));
  for (int i = 0; i < config.m; ++i) {
    if (!score_.picnn) {
      models_.push_back(pairs[i].nominal);
      continue;
    }
    conformal::ObjectUncertainty set;
    set.picnn = score_.picnn;
    set.contexts = pairs[i].contexts;
    set.q = score_.q;
    set.anchor = pairs[i].nominal;
    const auto r = robust::inner_max_scenario(g, stay, {set}, {initial_belief(g)},
                                              {.n_scenarios = std::max(1, config.scenarios)}, rng.next());
    models_.push_back(r.worst[0]);
  }
}

Action NeuroPolicy::act(const EpisodeConfig& config, const AgentState& state, Rng& rng) {
  const GridSpec& g = config.grid;
  const double here = capture_here(state);
  const Point p0 = g.center(state.cell);
  Action task_action;
  const int goal = nearest_localized(config, state);
  if (here >= config.found_threshold) {
    task_action = task_action_offset({p0, p0}, heading_angle(state.heading), here, config.found_threshold);
  } else if (goal >= 0) {
    task_action = task_action_offset({p0, p0 + toward(g, state.cell, goal, state.heading)},
                                     heading_angle(state.heading));
  } else {
    std::vector<Matrix> ms;
    std::vector<Vector> initial;
    for (std::size_t j = 0; j < state.active.size(); ++j) {
      ms.push_back(models_.at(state.active[j]));
      Vector b = Vector::Zero(g.cells() + 1);
      b.tail(g.cells()) = state.posterior[j];
      initial.push_back(b);
    }
    const robust::ModelEvaluator ev(g, std::move(ms), std::move(initial));
    robust::PlanOptions opt;
    opt.task = config.task;
    opt.beam_width = config.beam_width;
    opt.move_first = true;  // the observation already cleared this cell
    opt.threads = 1;
    const auto plan = robust::plan(g, ev, opt, p0);
    task_action = task_action_offset(plan.path, heading_angle(state.heading), here, config.found_threshold);
  }
  if (config.blend_lambda <= 0.0) return task_action;
  FeedbackSignals s;
  s.a_task = task_action;
  s.a_net = greedy_.act(config, state, rng);
  s.blend_lambda = config.blend_lambda;
  return blend_action(s, rng);
}

Action ScriptedPolicy::act(const EpisodeConfig&, const AgentState& state, Rng&) {
  const std::size_t i = static_cast<std::size_t>(state.step);
  return i < script_.size() ? script_[i] : Action::TurnLeft;
}

std::unique_ptr<Policy> make_policy(PolicyKind kind, const ScoreModel& score) {
  switch (kind) {
    case PolicyKind::Neuro: return std::make_unique<NeuroPolicy>(score);
    case PolicyKind::Random: return std::make_unique<RandomPolicy>();
    case PolicyKind::GreedyBelief: return std::make_unique<GreedyBeliefPolicy>();
  }
  throw InvalidArgument("unknown policy");
}

namespace {

// A target in the agent's cell is always seen. Under Proximity one elsewhere
// is seen with probability 1 - d_v(agent); a miss multiplies the posterior by
// the detection factor, so it follows the planner's detection model.
void observe(std::vector<Vector>& posterior, const std::vector<int>& cells, int agent, const GridSpec& grid,
             Observation mode, Rng& rng) {
  const Vector d = detection_factor(grid, grid.center(agent));
  for (std::size_t i = 0; i < posterior.size(); ++i) {
    Vector& p = posterior[i];
    const double u = rng.uniform();
    const bool seen = cells[i] == agent || (mode == Observation::Proximity && u < 1.0 - d[cells[i]]);
    if (seen) {
      p.setZero();
      p[cells[i]] = 1.0;
      continue;
    }
    if (mode == Observation::Proximity) p = p.cwiseProduct(d);
    p[agent] = 0.0;
    const double s = p.sum();
    if (s > 0.0) {
      p /= s;
    } else {
      p.setOnes();
      p[agent] = 0.0;
      p /= p.sum();
    }
  }
}

int sample_row(const Matrix& m, int u, Rng& rng) {
  const double r = rng.uniform();
  double acc = 0.0;
  for (Eigen::Index v = 0; v < m.cols(); ++v) {
    acc += m(u, v);
    if (r < acc) return static_cast<int>(v);
  }
  return static_cast<int>(m.cols()) - 1;
}

}  // namespace

EpisodeResult run_episode(const EpisodeConfig& config, Policy& policy, std::uint64_t seed) {
  config.validate();
  const GridSpec& g = config.grid;
  const int V = g.cells(), E = g.edge;
  Rng env(Rng::derive(seed, 0)), pol(Rng::derive(seed, 1));
  const int start = config.start();

  std::vector<CalibrationPair> pairs;
  for (int i = 0; i < config.k; ++i) pairs.push_back(draw_pair(g, config.family, config.noise, env));
  std::vector<Matrix> truth;
  for (int i = 0; i < config.k; ++i) truth.push_back(config.truth.empty() ? pairs[i].truth : config.truth[i]);

  std::vector<int> cells = config.object_cells;
  if (cells.empty()) {
    std::vector<int> free;
    for (int v = 0; v < V; ++v)
      if (v != start) free.push_back(v);
    for (int i = 0; i < config.k; ++i) {
      const std::size_t j = i + env.below(free.size() - i);
      std::swap(free[i], free[j]);
      cells.push_back(free[i]);
    }
  }

  EpisodeResult res;
  res.object_cells = cells;
  res.found_step.assign(config.m, -1);
  res.agent_cells.push_back(start);

  // Posterior over every target's cell: uniform away from the start, then observed.
  std::vector<Vector> posterior(config.m, Vector::Ones(V));
  for (auto& p : posterior) {
    p[start] = 0.0;
    p /= p.sum();
  }
  std::vector<int> cur(cells.begin(), cells.begin() + config.m);
  observe(posterior, cur, start, g, config.observation, env);

  policy.reset(config, pairs, pol);
  int agent = start, heading = 0, found = 0, last_found_moves = 0;
  const bool ordered = config.task == robust::Task::SMON;
  for (int step = 0; step < config.max_steps; ++step) {
    AgentState st;
    st.cell = agent;
    st.heading = heading;
    st.step = step;
    for (int i = 0; i < config.m; ++i) {
      if (res.found_step[i] >= 0) continue;
      st.active.push_back(i);
      st.posterior.push_back(posterior[i]);
      if (ordered) break;
    }
    const Action a = policy.act(config, st, pol);
    res.actions.push_back(a);
    res.steps = step + 1;
    if (a == Action::Forward) {
      const int dx[] = {1, 0, -1, 0}, dy[] = {0, 1, 0, -1};
      const int x = agent % E + dx[heading], y = agent / E + dy[heading];
      if (x >= 0 && y >= 0 && x < E && y < E) {
        agent = y * E + x;
        ++res.traveled;
      }
    } else if (a == Action::TurnLeft) {
      heading = (heading + 1) % 4;
    } else if (a == Action::TurnRight) {
      heading = (heading + 3) % 4;
    } else {
      bool hit = false;
      for (int i : st.active)
        if (cur[i] == agent) {
          res.found_step[i] = step + 1;
          ++found;
          hit = true;
        }
      if (!hit) {
        res.wrong_found = true;
        res.agent_cells.push_back(agent);
        break;
      }
      last_found_moves = res.traveled;
    }
    res.agent_cells.push_back(agent);
    if (found == config.m) break;
    if (config.moving_targets)
      for (int i = 0; i < config.m; ++i) {
        if (res.found_step[i] >= 0) continue;
        cur[i] = sample_row(truth[i], cur[i], env);
        posterior[i] = pairs[i].nominal.transpose() * posterior[i];
      }
    observe(posterior, cur, agent, g, config.observation, env);
  }

  const std::vector<int> targets(cells.begin(), cells.begin() + config.m);
  res.shortest = shortest_tour(g, start, targets, ordered);
  std::vector<int> found_cells;
  std::vector<int> by_step;
  for (int i = 0; i < config.m; ++i)
    if (res.found_step[i] >= 0) by_step.push_back(i);
  std::stable_sort(by_step.begin(), by_step.end(),
                   [&](int a, int b) { return res.found_step[a] < res.found_step[b]; });
  for (int i : by_step) found_cells.push_back(cells[i]);
  const int partial = found_cells.empty() ? 0 : shortest_tour(g, start, found_cells, ordered);
  const Metrics mt = compute_metrics(config.m, found, res.shortest, res.traveled, partial, last_found_moves);
  res.success = mt.success;
  res.progress = mt.progress;
  res.spl = mt.spl;
  res.ppl = mt.ppl;
  return res;
}

}  // namespace robustnav::sim
