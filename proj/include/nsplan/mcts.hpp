#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "nsplan/belief.hpp"
#include "nsplan/mdp.hpp"

namespace nsplan {

/// What a planner samples transitions from: either a ground-truth snapshot or
/// a learned belief. Rewards, terminal flags and gamma always come from the
/// shared structure snapshot (non-stationarity is confined to transitions).
struct ModelView {
    const MdpSnapshot* structure = nullptr;
    const MdpSnapshot* ground_truth = nullptr;
    const TransitionBelief* belief = nullptr;

    static ModelView from_snapshot(const MdpSnapshot& snap) {
        return ModelView{&snap, &snap, nullptr};
    }
    static ModelView from_belief(const MdpSnapshot& structure, const TransitionBelief& belief) {
        return ModelView{&structure, nullptr, &belief};
    }

    bool valid() const { return structure && (ground_truth || belief); }
    double gamma() const { return structure->gamma(); }
    bool terminal(StateId s) const { return structure->terminal(s); }
    double reward(StateId s, ActionId a, StateId next) const;
    /// Supported successors, sorted by state id.
    std::vector<StateId> support(StateId s, ActionId a) const;
    StateId sample_regular(StateId s, ActionId a, Rng& rng) const;
};

enum class SearchMode { Vanilla, RiskAverse, Adaptive };

struct SearchConfig {
    int simulations = 30000;
    double exploration = 1.4142135623730951;  // C_p
    int rollout_depth_cap = 100;
    std::uint64_t seed = 0;
    SearchMode mode = SearchMode::Vanilla;
    double epsilon_epistemic = 0.02;
    double epsilon_aleatoric = 0.0;
    // fresh chance nodes start from N_init virtual visits worth Q_init each;
    // the optimistic residue decays as real returns accumulate and is what
    // pushes simulations toward unexplored regions on sparse-goal maps
    double q_init = 1.0;
    int n_init = 1;
};

struct SearchStats {
    long simulations = 0;
    long regular_samples = 0;     // DPAS resolutions in regular mode
    long worst_case_samples = 0;  // DPAS resolutions in worst-case mode
    double regular_fraction() const {
        const long total = regular_samples + worst_case_samples;
        return total == 0 ? 1.0 : static_cast<double>(regular_samples) / total;
    }
};

struct PlanResult {
    ActionId best = 0;
    std::vector<double> policy;  // visit fractions, one per action
    SearchStats stats;
};

struct ChanceNode;

/// Decision node: the agent picks an action here. Within one search each
/// state owns a single decision node, so value estimates pool across every
/// path that reaches the state (the usual transposition sharing for tabular
/// models; simulations still backpropagate along their own traversal path).
struct DecisionNode {
    StateId state = 0;
    int visits = 0;
    double value_sum = 0.0;
    bool expanded = false;
    std::vector<ChanceNode> actions;

    double mean_value() const { return visits == 0 ? 0.0 : value_sum / visits; }
};

/// Chance node: the environment picks a successor here. Virtual prior visits
/// implement the (N_init, Q_init) initialization; they shape the value mean
/// but never count toward visit statistics or the root policy.
struct ChanceNode {
    int visits = 0;
    double value_sum = 0.0;
    int prior_visits = 0;
    double prior_value_sum = 0.0;
    signed char last_mode = -1;  // -1 n/a, 0 worst-case, 1 regular
    std::vector<std::pair<StateId, DecisionNode*>> children;  // realized successors only

    double mean_value() const {
        const int n = visits + prior_visits;
        return n == 0 ? 0.0 : (value_sum + prior_value_sum) / n;
    }
    DecisionNode* child(StateId s) const;
};

/// Per-decision DPAS gate. Mode decisions are cached per (s, a): beliefs only
/// change between decisions, and the subset-level aleatoric delta is computed
/// once per search. Variance draws consume a dedicated stream derived from
/// `gate_seed`, never the tree's sampling stream.
class DpasGate {
  public:
    DpasGate(const TransitionBelief& current, const TransitionBelief& previous,
             double epsilon_epistemic, double epsilon_aleatoric, std::uint64_t gate_seed);

    /// True when both uncertainty deltas clear their thresholds; pairs with
    /// no instance evidence in the current belief are always worst-case.
    bool regular(StateId s, ActionId a);

    double aleatoric_delta();

  private:
    const TransitionBelief& current_;
    const TransitionBelief& previous_;
    double eps_e_;
    double eps_a_;
    std::uint64_t seed_;
    std::vector<StateActionPair> subset_;
    std::optional<double> delta_a_;
    std::vector<signed char> mode_cache_;  // -1 unknown, 0 worst, 1 regular
};

/// UCT selection among a decision node's chance children: unvisited children
/// first (in action order), otherwise argmax of mean value plus exploration
/// bonus, ties to the first action.
ActionId uct_select(const DecisionNode& node, double exploration);

/// Worst-case successor at a chance node: unvisited supported successors are
/// taken first (lowest state id), otherwise the successor minimizing
/// r(s,a,s') + gamma * V(child subtree).
StateId sample_successor_worst_case(const ChanceNode& node, const ModelView& view, StateId s,
                                    ActionId a);

/// Regular-mode successor draw: the snapshot's distribution for ground-truth
/// views, the posterior mean for belief views.
StateId sample_successor_regular(const ModelView& view, StateId s, ActionId a, Rng& rng);

/// One search tree, confined to a single worker. Vanilla and risk-averse
/// searches run on `current` alone; adaptive search routes every chance-node
/// sampling event through the DPAS gate, falling back to worst-case draws
/// from `previous` when the gate is closed.
class TreeSearch {
  public:
    TreeSearch(StateId root_state, ModelView current, const ModelView* previous,
               SearchConfig cfg);

    PlanResult run();
    const DecisionNode& root() const { return *root_; }
    const SearchStats& stats() const { return stats_; }

    /// Depth-limited debug dump: one line per node with visits, mean value
    /// and the sampling mode used on each edge.
    void dump(std::ostream& out, int max_depth) const;

  private:
    struct PathStep {
        DecisionNode* node;
        ActionId action;
        double reward;  // r(node->state, action, successor)
    };

    DecisionNode* node_for(StateId state);
    void simulate();
    StateId sample_successor(DecisionNode& node, ActionId a, double& reward_out);
    double rollout(StateId s);
    /// Walks the traversal path from the leaf to the root, applying one
    /// discount step plus the edge reward per transition.
    void backpropagate(DecisionNode* leaf, double value);

    ModelView current_;
    const ModelView* previous_;
    SearchConfig cfg_;
    std::deque<DecisionNode> pool_;
    std::vector<DecisionNode*> state_nodes_;
    std::vector<PathStep> path_;
    DecisionNode* root_;
    Rng tree_rng_;
    std::optional<DpasGate> gate_;
    SearchStats stats_;
};

/// Runs m simulations from s0 and returns the argmax-visit action together
/// with the root visit distribution. In Adaptive mode `previous` is required;
/// Vanilla and RiskAverse run on `current` alone.
PlanResult plan(StateId s0, const ModelView& current, const ModelView* previous,
                const SearchConfig& cfg);

}  // namespace nsplan
