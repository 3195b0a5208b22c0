#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "nsplan/belief.hpp"
#include "nsplan/config.hpp"
#include "nsplan/gridworld.hpp"
#include "nsplan/mcts.hpp"
#include "nsplan/rats.hpp"

namespace nsplan {

enum class PlannerKind { Mcts, RaMcts, AdaMcts, Rats };
enum class ModelAccess { GroundTruthCurrent, GroundTruthPrevious, LearnedPrevious, Learned };

std::string planner_name(PlannerKind kind);
PlannerKind planner_from_name(const std::string& name);
std::string access_name(ModelAccess access);
ModelAccess access_from_name(const std::string& name);
std::string valid_planner_names();

struct WarmupConfig {
    int episodes = 200;
    int simulations = 1000;
};

/// One Table-1 cell: environment, slip change, planner, model access, budget.
struct ScenarioConfig {
    std::string env_name = "frozen_lake_4x4";
    double p_old = 0.7;
    double p_new = 0.7;
    PlannerKind planner = PlannerKind::Mcts;
    ModelAccess model_access = ModelAccess::GroundTruthCurrent;
    int episodes = 100;
    int max_steps = 200;
    std::uint64_t seed = 1;
    double gamma = 0.95;
    int jobs = 1;
    SearchConfig search;  // desk-scale simulation budget by default
    RatsConfig rats;
    TuneConfig tune;
    BeliefConfig belief;
    WarmupConfig warmup;

    ScenarioConfig() { search.simulations = 3000; }

    /// Rejects inconsistent planner/model-access combinations with a
    /// diagnostic naming the valid ones.
    void validate() const;
    std::string cell_id() const;

    static ScenarioConfig from_config(const ConfigFile& file);
    void apply_config(const ConfigFile& file);
};

struct EpisodeResult {
    int episode = 0;
    std::uint64_t seed = 0;
    int steps = 0;
    double discounted_return = 0.0;
    double regular_fraction = 1.0;  // share of DPAS resolutions in regular mode
    int decisions = 0;
    double plan_seconds = 0.0;  // excluded from determinism comparisons
};

struct ScenarioResult {
    ScenarioConfig config;
    std::vector<EpisodeResult> episodes;
    double mean_return = 0.0;
    double stderr_return = 0.0;  // NaN when episodes < 2
    double mean_decision_seconds = 0.0;
    double mean_regular_fraction = 1.0;
    std::string error;  // non-empty when the cell failed

    void finalize();
    /// Per-episode regular-mode fractions in episode order.
    std::vector<double> mode_trace() const;
};

/// Successor sets the belief is defined over: one sorted list per (s, a),
/// empty rows for terminal states.
std::vector<std::vector<StateId>> structural_support(const EnvironmentInstance& env);

/// The data-collection belief for the pre-change MDP: vanilla MCTS with the
/// ground-truth old snapshot for `warmup.episodes` episodes, observations
/// fitted online. Results are cached per (env, p_old, gamma, seed, budgets)
/// within the process.
std::shared_ptr<const TransitionBelief> warmup_belief(const ScenarioConfig& cfg);

/// Runs one scenario cell: builds the old and new snapshots, pre-trains the
/// learned belief where the access mode requires it, fires the change signal
/// and runs the episode loop with per-decision planning.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

struct MatrixConfig {
    std::vector<std::string> envs = {"frozen_lake_4x4", "cliff_walking", "ns_bridge"};
    std::vector<double> p_values = {0.4, 0.5, 0.6, 0.8, 0.9, 1.0};
    ScenarioConfig base;

    static MatrixConfig from_config(const ConfigFile& file);
};

/// The six-planner comparison: MCTS and RATS with current ground truth,
/// MCTS/RATS on stale models, and ADA-MCTS. One result per cell; failures
/// are recorded in the cell's error field and the run continues.
std::vector<ScenarioResult> run_table1(const MatrixConfig& cfg);

/// Component ablation: plain MCTS and RA-MCTS on the stale learned model
/// versus full ADA-MCTS.
std::vector<ScenarioResult> run_ablation(const MatrixConfig& cfg);

struct TimingRow {
    std::string env;
    int decisions = 0;
    double ada_mean_seconds = 0.0;
    double ada_sd_seconds = 0.0;
    double rats_mean_seconds = 0.0;
    double rats_sd_seconds = 0.0;
    double speedup = 0.0;  // (rats - ada) / rats
};

struct TimingConfig {
    std::vector<std::string> envs = {"frozen_lake_4x4", "cliff_walking", "ns_bridge"};
    double p_old = 0.7;
    double p_new = 0.9;
    double gamma = 0.95;
    int min_decisions = 30;
    int max_steps = 200;
    std::uint64_t seed = 1;
    SearchConfig search;  // paper budget by default (30000 simulations)
    RatsConfig rats;      // paper depth by default (3)
    TuneConfig tune;
    BeliefConfig belief;
    WarmupConfig warmup;

    static TimingConfig from_config(const ConfigFile& file);
};

/// Per-decision wall time of ADA-MCTS versus depth-limited RATS at matched
/// decision counts on each environment.
std::vector<TimingRow> run_timing(const TimingConfig& cfg);

/// Simple worker-pool loop; fn(i) is called once for every i in [0, count).
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

}  // namespace nsplan
