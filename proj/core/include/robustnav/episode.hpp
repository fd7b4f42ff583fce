#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "robustnav/belief.hpp"
#include "robustnav/picnn.hpp"
#include "robustnav/planner.hpp"
#include "robustnav/sampler.hpp"
#include "robustnav/sensitivity.hpp"

namespace robustnav::sim {

enum class PolicyKind { Neuro, Random, GreedyBelief };
std::string to_string(PolicyKind kind);
/// "neuro", "random", "greedy-belief". Throws InvalidArgument.
PolicyKind parse_policy(const std::string& name);

/// SameCell: a target is seen only from its own cell. Proximity: also from
/// elsewhere with probability 1 - d_v(agent), the detection model of the belief.
enum class Observation { SameCell, Proximity };
std::string to_string(Observation mode);
/// "same-cell", "proximity". Throws InvalidArgument.
Observation parse_observation(const std::string& name);

/// Score network and calibrated threshold used to build each target's set.
struct ScoreModel {
  std::shared_ptr<const picnn::Params> picnn;
  double q = kInf;
};

/// Agent on cell centres with a heading (0 east, 1 north, 2 west, 3 south).
/// FORWARD moves one cell along the heading (a wall leaves it in place),
/// turns rotate by 90 degrees. FOUND is valid when a sought target shares the
/// agent's cell; a wrong FOUND ends the episode.
struct EpisodeConfig {
  GridSpec grid;                  // horizon is the planning horizon
  int m = 1;                      // targets, objects 0 .. m-1
  int k = 1;                      // objects placed, the rest are distractors
  robust::Task task = robust::Task::UMON;  // SMON: targets in index order
  DynamicsFamily family = DynamicsFamily::Stationary;
  double noise = 0.1;
  std::vector<Matrix> truth;      // per object; empty: the drawn pair's truth
  bool moving_targets = false;
  Observation observation = Observation::Proximity;
  std::vector<int> object_cells;  // empty: distinct uniform cells other than the start
  int start_cell = -1;            // -1: cell of grid.start()
  int max_steps = 20;
  double blend_lambda = 0.0;      // neuro: probability of the stand-in network action
  int beam_width = 16;
  int scenarios = 16;
  double found_threshold = 0.9;

  int start() const { return start_cell >= 0 ? start_cell : grid.cell_of(grid.start()); }
  /// Throws InvalidArgument.
  void validate() const;
};

/// What a policy sees before acting.
struct AgentState {
  int cell = 0;
  int heading = 0;
  int step = 0;
  std::vector<int> active;         // objects being sought (S-MON: the next target only)
  std::vector<Vector> posterior;   // per active object, V cell probabilities
};

class Policy {
 public:
  virtual ~Policy() = default;
  /// Called once per episode with the drawn (features, nominal) pair of every object.
  virtual void reset(const EpisodeConfig& config, const std::vector<CalibrationPair>& pairs, Rng& rng);
  virtual Action act(const EpisodeConfig& config, const AgentState& state, Rng& rng) = 0;
};

class RandomPolicy : public Policy {
 public:
  Action act(const EpisodeConfig& config, const AgentState& state, Rng& rng) override;
};

/// FOUND when the current cell is believed; otherwise heads for the most
/// probable cell (nearest, then lowest index, on ties).
class GreedyBeliefPolicy : public Policy {
 public:
  Action act(const EpisodeConfig& config, const AgentState& state, Rng& rng) override;
};

/// Plans over the worst-case member of each target's set (scenario search on
/// the stationary path at reset), offsets the first planned step into an
/// action and blends it with the greedy action as the network stand-in.
/// Planning starts from the observed posterior and never stays in place,
/// since the agent's own cell is already observed. A target whose posterior
/// reaches the FOUND threshold is localized: the agent walks to the nearest
/// one, keeping its heading when that shortens the distance.
class NeuroPolicy : public Policy {
 public:
  explicit NeuroPolicy(ScoreModel score) : score_(std::move(score)) {}
  void reset(const EpisodeConfig& config, const std::vector<CalibrationPair>& pairs, Rng& rng) override;
  Action act(const EpisodeConfig& config, const AgentState& state, Rng& rng) override;
  const std::vector<Matrix>& models() const { return models_; }

 private:
  ScoreModel score_;
  std::vector<Matrix> models_;
  GreedyBeliefPolicy greedy_;
};

/// Replays a fixed action list, then turns left.
class ScriptedPolicy : public Policy {
 public:
  explicit ScriptedPolicy(std::vector<Action> script) : script_(std::move(script)) {}
  Action act(const EpisodeConfig& config, const AgentState& state, Rng& rng) override;

 private:
  std::vector<Action> script_;
};

/// Neuro needs `score`; without one it plans on the nominal models.
std::unique_ptr<Policy> make_policy(PolicyKind kind, const ScoreModel& score = {});

struct EpisodeResult {
  std::vector<Action> actions;
  std::vector<int> agent_cells;   // start, then after every step
  std::vector<int> object_cells;  // initial placement
  std::vector<int> found_step;    // per target, 1-based step of its FOUND, -1 if never
  bool success = false;
  bool wrong_found = false;
  double progress = 0.0;
  double spl = 0.0;
  double ppl = 0.0;
  int steps = 0;
  int shortest = 0;  // geodesic tour length through the initial target cells
  int traveled = 0;

  bool operator==(const EpisodeResult&) const = default;
};

/// Environment draws use Rng::derive(seed, 0) and policy draws
/// Rng::derive(seed, 1), so policies run on the same seed face the same world.
EpisodeResult run_episode(const EpisodeConfig& config, Policy& policy, std::uint64_t seed);

}  // namespace robustnav::sim
