#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "robustnav/basis.hpp"
#include "robustnav/belief.hpp"
#include "robustnav/conformal.hpp"
#include "robustnav/counterpart.hpp"
#include "robustnav/scenario.hpp"

namespace robustnav::robust {

enum class Task { UMON, SMON };
enum class Search { Exhaustive, Beam };

std::string to_string(Task task);
std::string to_string(Search search);
/// "umon" / "smon", "exhaustive" / "beam". Throw InvalidArgument.
Task parse_task(const std::string& name);
Search parse_search(const std::string& name);

/// sum_t gamma^t sum_i (beta_i^t)_0 over the length of the sequences.
double objective_umon(const std::vector<BeliefSequence>& beliefs, const GridSpec& grid);

/// sum_{t < tau} gamma^t |p_{t+1} - p_t|.
double path_length_term(const AgentPath& path, const GridSpec& grid);

/// Capture objective of a single object minus length_weight times the length
/// term; `literal` adds the term instead. Throws InvalidArgument unless n = 1.
double objective_smon(const std::vector<BeliefSequence>& beliefs, const AgentPath& path, const GridSpec& grid,
                      double length_weight, bool literal = false);

/// Scores a path by the (worst-case or model) capture objective summed over
/// objects for t = 0 .. len. Implementations are safe to call concurrently.
class PathEvaluator {
 public:
  virtual ~PathEvaluator() = default;
  virtual int objects() const = 0;
  virtual double capture(const AgentPath& path) const = 0;
  /// Trajectories reported with a plan.
  virtual std::vector<BeliefSequence> beliefs(const AgentPath& path) const = 0;
  long lp_solves() const { return lp_solves_.load(); }

 protected:
  mutable std::atomic<long> lp_solves_{0};
};

/// Negated counterpart value. Reported beliefs roll out a member of each set
/// (the anchor when it is one).
class CounterpartEvaluator : public PathEvaluator {
 public:
  CounterpartEvaluator(const GridSpec& grid, const std::vector<conformal::ObjectUncertainty>& sets,
                       std::vector<Vector> initial, Method method = Method::FixedBelief,
                       Route route = Route::Decomposed, CounterpartOptions options = {});
  int objects() const override { return static_cast<int>(polys_.size()); }
  double capture(const AgentPath& path) const override;
  std::vector<BeliefSequence> beliefs(const AgentPath& path) const override;
  const std::vector<ObjectPolytopes>& polytopes() const { return polys_; }

 private:
  GridSpec grid_;
  std::vector<ObjectPolytopes> polys_;
  std::vector<Matrix> members_;
  std::vector<Vector> initial_;
  Method method_;
  Route route_;
  CounterpartOptions options_;
};

/// Negated scenario value; every path reuses the same seed.
class ScenarioEvaluator : public PathEvaluator {
 public:
  ScenarioEvaluator(const GridSpec& grid, std::vector<conformal::ObjectUncertainty> sets, std::vector<Vector> initial,
                    ScenarioOptions options, std::uint64_t seed);
  int objects() const override { return static_cast<int>(sets_.size()); }
  double capture(const AgentPath& path) const override;
  std::vector<BeliefSequence> beliefs(const AgentPath& path) const override;

 private:
  GridSpec grid_;
  std::vector<conformal::ObjectUncertainty> sets_;
  std::vector<Vector> initial_;
  ScenarioOptions options_;
  std::uint64_t seed_;
};

/// Dense rollout under fixed transition matrices.
class ModelEvaluator : public PathEvaluator {
 public:
  ModelEvaluator(const GridSpec& grid, std::vector<Matrix> ms, std::vector<Vector> initial);
  int objects() const override { return static_cast<int>(ms_.size()); }
  double capture(const AgentPath& path) const override;
  std::vector<BeliefSequence> beliefs(const AgentPath& path) const override;

 private:
  GridSpec grid_;
  std::vector<Matrix> ms_;
  std::vector<Vector> initial_;
};

/// Reduced rollout on a basis expansion of each matrix. Reported beliefs use
/// the dense rollout.
class BasisModelEvaluator : public PathEvaluator {
 public:
  BasisModelEvaluator(const GridSpec& grid, const std::vector<Matrix>& ms, std::vector<Vector> initial,
                      BasisKind kind, int k);
  int objects() const override { return static_cast<int>(ms_.size()); }
  double capture(const AgentPath& path) const override;
  std::vector<BeliefSequence> beliefs(const AgentPath& path) const override;

 private:
  GridSpec grid_;
  std::vector<Matrix> ms_;
  std::vector<BasisExpansion> expansions_;
  std::vector<Vector> initial_;
};

/// Move k: 0 stays, 1..8 step max_step along angle (k - 1) * 45 degrees.
inline constexpr int kMoves = 9;
Point move_offset(int k, double max_step);
/// Empty if some move leaves [0, E]^2.
AgentPath apply_moves(const GridSpec& grid, const Point& start, const std::vector<int>& moves);

struct PlanOptions {
  Task task = Task::UMON;
  Search search = Search::Beam;
  int beam_width = 32;          // <= 0: unlimited (same result as exhaustive)
  double length_weight = 0.05;  // S-MON only
  bool literal_smon = false;
  bool move_first = false;      // exclude staying as the first move
  int threads = 0;              // 0: thread_count()
};

struct PlanResult {
  AgentPath path;
  std::vector<int> moves;
  double robust_value = 0.0;  // task objective at the returned path
  double capture = 0.0;       // evaluator capture, without the length term
  std::vector<BeliefSequence> beliefs;
  int evaluations = 0;
  long lp_solves = 0;
  double wall_ms = 0.0;
};

/// Searches move sequences of length grid.horizon from `start`. Ties go to the
/// lexicographically smallest move sequence; a later candidate replaces the
/// incumbent only when it is better by more than 1e-12.
PlanResult plan(const GridSpec& grid, const PathEvaluator& evaluator, const PlanOptions& options,
                const Point& start);
inline PlanResult plan(const GridSpec& grid, const PathEvaluator& evaluator, const PlanOptions& options = {}) {
  return plan(grid, evaluator, options, grid.start());
}

}  // namespace robustnav::robust
