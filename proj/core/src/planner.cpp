#include "robustnav/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "robustnav/parallel.hpp"

namespace robustnav::robust {

std::string to_string(Task task) { return task == Task::UMON ? "umon" : "smon"; }
std::string to_string(Search search) { return search == Search::Exhaustive ? "exhaustive" : "beam"; }

Task parse_task(const std::string& name) {
  if (name == "umon") return Task::UMON;
  if (name == "smon") return Task::SMON;
  throw InvalidArgument("unknown task '" + name + "' (expected umon or smon)");
}

Search parse_search(const std::string& name) {
  if (name == "exhaustive") return Search::Exhaustive;
  if (name == "beam") return Search::Beam;
  throw InvalidArgument("unknown search '" + name + "' (expected exhaustive or beam)");
}

double objective_umon(const std::vector<BeliefSequence>& beliefs, const GridSpec& grid) {
  double total = 0.0;
  for (const auto& seq : beliefs) {
    double g = 1.0;
    for (const auto& b : seq) {
      total += g * b[0];
      g *= grid.gamma;
    }
  }
  return total;
}

double path_length_term(const AgentPath& path, const GridSpec& grid) {
  double total = 0.0, g = 1.0;
  for (std::size_t t = 0; t + 1 < path.size(); ++t) {
    total += g * (path[t + 1] - path[t]).norm();
    g *= grid.gamma;
  }
  return total;
}

double objective_smon(const std::vector<BeliefSequence>& beliefs, const AgentPath& path, const GridSpec& grid,
                      double length_weight, bool literal) {
  if (beliefs.size() != 1) throw InvalidArgument("objective_smon: exactly one active target required");
  const double term = length_weight * path_length_term(path, grid);
  return objective_umon(beliefs, grid) + (literal ? term : -term);
}

namespace {

std::vector<Vector> checked_initial(const GridSpec& grid, std::vector<Vector> initial, std::size_t n) {
  if (initial.empty()) initial.assign(n, initial_belief(grid));
  if (initial.size() != n) throw ShapeMismatch("planner: one initial belief per object required");
  for (const auto& b : initial)
    if (b.size() != grid.cells() + 1) throw DimensionMismatch("planner: initial belief must have V + 1 slots");
  return initial;
}

}  // namespace

CounterpartEvaluator::CounterpartEvaluator(const GridSpec& grid, const std::vector<conformal::ObjectUncertainty>& sets,
                                           std::vector<Vector> initial, Method method, Route route,
                                           CounterpartOptions options)
    : grid_(grid),
      initial_(checked_initial(grid, std::move(initial), sets.size())),
      method_(method),
      route_(route),
      options_(options) {
  Rng rng(0);
  for (const auto& set : sets) {
    polys_.push_back(make_polytopes(set, options_));
    lp_solves_ += polys_.back().lp_solves;
    members_.push_back(find_member(set, rng, ScenarioOptions{}.rejection_budget));
  }
}

double CounterpartEvaluator::capture(const AgentPath& path) const {
  CounterpartInput in;
  in.grid = grid_;
  in.path = path;
  for (const auto& p : polys_) in.objects.push_back(&p);
  in.initial = initial_;
  const CounterpartResult r = solve_counterpart(in, method_, route_, options_);
  lp_solves_ += r.lp_solves;
  return -r.value;
}

std::vector<BeliefSequence> CounterpartEvaluator::beliefs(const AgentPath& path) const {
  std::vector<BeliefSequence> out;
  for (std::size_t i = 0; i < members_.size(); ++i) out.push_back(rollout(grid_, path, members_[i], initial_[i]));
  return out;
}

ScenarioEvaluator::ScenarioEvaluator(const GridSpec& grid, std::vector<conformal::ObjectUncertainty> sets,
                                     std::vector<Vector> initial, ScenarioOptions options, std::uint64_t seed)
    : grid_(grid),
      sets_(std::move(sets)),
      initial_(checked_initial(grid, std::move(initial), sets_.size())),
      options_(options),
      seed_(seed) {}

double ScenarioEvaluator::capture(const AgentPath& path) const {
  return -inner_max_scenario(grid_, path, sets_, initial_, options_, seed_).value;
}

std::vector<BeliefSequence> ScenarioEvaluator::beliefs(const AgentPath& path) const {
  const ScenarioResult r = inner_max_scenario(grid_, path, sets_, initial_, options_, seed_);
  std::vector<BeliefSequence> out;
  for (std::size_t i = 0; i < sets_.size(); ++i) out.push_back(rollout(grid_, path, r.worst[i], initial_[i]));
  return out;
}

ModelEvaluator::ModelEvaluator(const GridSpec& grid, std::vector<Matrix> ms, std::vector<Vector> initial)
    : grid_(grid), ms_(std::move(ms)), initial_(checked_initial(grid, std::move(initial), ms_.size())) {
  for (const auto& m : ms_) check_transition(m, grid.cells());
}

double ModelEvaluator::capture(const AgentPath& path) const { return objective_umon(beliefs(path), grid_); }

std::vector<BeliefSequence> ModelEvaluator::beliefs(const AgentPath& path) const {
  std::vector<BeliefSequence> out;
  for (std::size_t i = 0; i < ms_.size(); ++i) out.push_back(rollout(grid_, path, ms_[i], initial_[i]));
  return out;
}

BasisModelEvaluator::BasisModelEvaluator(const GridSpec& grid, const std::vector<Matrix>& ms,
                                         std::vector<Vector> initial, BasisKind kind, int k)
    : grid_(grid), ms_(ms), initial_(checked_initial(grid, std::move(initial), ms.size())) {
  for (const auto& m : ms) expansions_.emplace_back(grid, kind, k, m);
}

double BasisModelEvaluator::capture(const AgentPath& path) const {
  double total = 0.0;
  for (std::size_t i = 0; i < expansions_.size(); ++i) {
    double g = 1.0;
    for (double c : basis_capture(expansions_[i], grid_, path, initial_[i])) {
      total += g * c;
      g *= grid_.gamma;
    }
  }
  return total;
}

std::vector<BeliefSequence> BasisModelEvaluator::beliefs(const AgentPath& path) const {
  std::vector<BeliefSequence> out;
  for (std::size_t i = 0; i < ms_.size(); ++i) out.push_back(rollout(grid_, path, ms_[i], initial_[i]));
  return out;
}

Point move_offset(int k, double max_step) {
  if (k < 0 || k >= kMoves) throw InvalidArgument("move index out of range");
  if (k == 0) return Point::Zero();
  const double a = (k - 1) * 0.25 * std::numbers::pi;
  // Snap the axis-aligned components so that repeated moves stay on exact coordinates.
  auto snap = [](double x) { return std::abs(x) < 1e-15 ? 0.0 : x; };
  return max_step * Point(snap(std::cos(a)), snap(std::sin(a)));
}

namespace {

bool inside(const GridSpec& grid, const Point& p) {
  return p.x() >= -1e-12 && p.y() >= -1e-12 && p.x() <= grid.edge + 1e-12 && p.y() <= grid.edge + 1e-12;
}

}  // namespace

AgentPath apply_moves(const GridSpec& grid, const Point& start, const std::vector<int>& moves) {
  AgentPath path{start};
  for (int k : moves) {
    const Point p = path.back() + move_offset(k, grid.max_step);
    if (!inside(grid, p)) return {};
    path.push_back(p);
  }
  return path;
}

namespace {

struct Candidate {
  std::vector<int> moves;
  AgentPath path;
  double score = 0.0;
  double capture = 0.0;
};

void score_all(std::vector<Candidate>& cands, const GridSpec& grid, const PathEvaluator& ev, const PlanOptions& opt) {
  parallel_for(
      cands.size(),
      [&](std::size_t j) {
        Candidate& c = cands[j];
        c.capture = ev.capture(c.path);
        const double term = opt.length_weight * path_length_term(c.path, grid);
        c.score = opt.task == Task::SMON ? c.capture + (opt.literal_smon ? term : -term) : c.capture;
      },
      opt.threads);
}

void expand(std::vector<Candidate>& next, const Candidate& parent, const GridSpec& grid, bool move_first) {
  for (int k = move_first && parent.moves.empty() ? 1 : 0; k < kMoves; ++k) {
    const Point p = parent.path.back() + move_offset(k, grid.max_step);
    if (!inside(grid, p)) continue;
    Candidate c;
    c.moves = parent.moves;
    c.moves.push_back(k);
    c.path = parent.path;
    c.path.push_back(p);
    next.push_back(std::move(c));
  }
}

// Index of the winner of a lexicographically ordered list.
std::size_t pick(const std::vector<Candidate>& cands) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < cands.size(); ++j)
    if (cands[j].score > cands[best].score + 1e-12) best = j;
  return best;
}

}  // namespace

PlanResult plan(const GridSpec& grid, const PathEvaluator& evaluator, const PlanOptions& options,
                const Point& start) {
  const auto t0 = std::chrono::steady_clock::now();
  grid.validate();
  if (options.task == Task::SMON && evaluator.objects() != 1)
    throw InvalidArgument("plan: S-MON plans for exactly one active target");
  const long solves_before = evaluator.lp_solves();
  const int tau = grid.horizon;
  PlanResult res;

  std::vector<Candidate> frontier(1);
  frontier[0].path = {start};
  validate_path(grid, frontier[0].path, start);
  if (options.search == Search::Exhaustive) {
    if (tau * std::log(static_cast<double>(kMoves)) > std::log(1e7))
      throw InvalidArgument("plan: exhaustive search limited to 9^tau <= 1e7 candidates");
    for (int t = 0; t < tau; ++t) {
      std::vector<Candidate> next;
      for (const auto& c : frontier) expand(next, c, grid, options.move_first);
      frontier = std::move(next);
    }
    score_all(frontier, grid, evaluator, options);
    res.evaluations = static_cast<int>(frontier.size());
  } else {
    const bool unlimited = options.beam_width <= 0;
    for (int t = 0; t < tau; ++t) {
      std::vector<Candidate> next;
      for (const auto& c : frontier) expand(next, c, grid, options.move_first);
      // Keep lexicographic order of the move sequences.
      std::sort(next.begin(), next.end(), [](const Candidate& a, const Candidate& b) { return a.moves < b.moves; });
      if (!unlimited || t + 1 == tau) {
        score_all(next, grid, evaluator, options);
        res.evaluations += static_cast<int>(next.size());
      }
      if (!unlimited && static_cast<int>(next.size()) > options.beam_width && t + 1 < tau) {
        std::stable_sort(next.begin(), next.end(),
                         [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
        next.resize(options.beam_width);
        std::sort(next.begin(), next.end(), [](const Candidate& a, const Candidate& b) { return a.moves < b.moves; });
      }
      frontier = std::move(next);
    }
    if (tau == 0) {
      score_all(frontier, grid, evaluator, options);
      res.evaluations = 1;
    }
  }

  const Candidate& best = frontier[pick(frontier)];
  res.path = best.path;
  res.moves = best.moves;
  res.robust_value = best.score;
  res.capture = best.capture;
  res.beliefs = evaluator.beliefs(best.path);
  res.lp_solves = evaluator.lp_solves() - solves_before;
  res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace robustnav::robust
