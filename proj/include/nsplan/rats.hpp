#pragma once

#include <cstdint>

#include "nsplan/gridworld.hpp"
#include "nsplan/mcts.hpp"

namespace nsplan {

struct RatsConfig {
    int depth = 3;          // decision levels below the root
    int leaf_rollouts = 10; // K; 0 gives a zero leaf heuristic
    int rollout_depth_cap = 100;
    std::uint64_t seed = 0;
};

/// Depth-limited risk-averse minimax search: max over actions at decision
/// nodes, worst supported successor at chance nodes, leaf values from the
/// mean of K uniform-random rollouts under the model (worst-case sampling is
/// disabled below the horizon). Ties resolve to the first action.
///
/// `node_counter`, when given, accumulates the number of decision nodes
/// evaluated; bounded by (max_support * |A|)^depth.
ActionId rats_plan(StateId s0, const ModelView& model, const RatsConfig& cfg,
                   long* node_counter = nullptr);

/// Root action values, one per action (used by tests).
std::vector<double> rats_action_values(StateId s0, const ModelView& model, const RatsConfig& cfg,
                                       long* node_counter = nullptr);

/// Mean wall-clock seconds per rats_plan call, measured over at least
/// `min_decisions` decisions while following the resulting policy on the
/// ground-truth environment.
double rats_decision_time(const EnvironmentInstance& env, const ModelView& model,
                          const RatsConfig& cfg, int min_decisions = 30,
                          int max_steps_per_episode = 200);

}  // namespace nsplan
