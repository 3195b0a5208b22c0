#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nsplan/rng.hpp"

namespace nsplan {

using StateId = int;
using ActionId = int;

/// Instance-specific latent parameters drawn from a standard normal prior.
/// Tagged onto every transition record so the global replay buffer can tell
/// which environment instance generated an experience.
using LatentTag = std::vector<double>;

/// Sparse categorical distribution over successor states.
/// Entries are sorted by state id, have strictly positive probability and
/// sum to one within 1e-9.
class TransitionDistribution {
  public:
    struct Entry {
        StateId state;
        double prob;
    };

    TransitionDistribution() = default;
    explicit TransitionDistribution(std::vector<Entry> entries);

    const std::vector<Entry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t support_size() const { return entries_.size(); }

    double prob_of(StateId s) const;
    StateId sample(Rng& rng) const;

  private:
    std::vector<Entry> entries_;
};

/// One stationary version M_k of the evolving decision process.
/// Rewards live on (s, a, s') triples; terminal states absorb with zero
/// reward and carry no outgoing distributions.
class MdpSnapshot {
  public:
    MdpSnapshot() = default;
    MdpSnapshot(int num_states, int num_actions, double gamma);

    void set_terminal(StateId s, bool terminal = true);
    /// Defines the transition for (s, a). Outcomes with zero probability are
    /// dropped; duplicate successor states are merged.
    void set_transition(StateId s, ActionId a, const std::vector<StateId>& successors,
                        const std::vector<double>& probs, const std::vector<double>& rewards);

    /// Checks the structural invariants; throws std::invalid_argument on
    /// violation. Call once after construction.
    void validate() const;

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    double gamma() const { return gamma_; }
    bool terminal(StateId s) const { return terminal_[static_cast<std::size_t>(s)] != 0; }

    const TransitionDistribution& transition(StateId s, ActionId a) const;
    /// Reward for the realized transition (s, a, s'); throws if s' is not in
    /// the support of (s, a).
    double reward(StateId s, ActionId a, StateId next) const;
    /// Rewards aligned with transition(s, a).entries().
    const std::vector<double>& edge_rewards(StateId s, ActionId a) const;

  private:
    std::size_t index(StateId s, ActionId a) const {
        return static_cast<std::size_t>(s) * static_cast<std::size_t>(num_actions_) +
               static_cast<std::size_t>(a);
    }

    int num_states_ = 0;
    int num_actions_ = 0;
    double gamma_ = 0.95;
    std::vector<std::uint8_t> terminal_;
    std::vector<TransitionDistribution> transitions_;
    std::vector<std::vector<double>> rewards_;
};

/// A piecewise-stationary process: an ordered list of snapshots plus the
/// episode indices at which the environment switches. The agent is notified
/// of each switch but not of its content.
struct NonStationarySchedule {
    std::vector<MdpSnapshot> snapshots;
    std::vector<int> change_times;
    bool change_signal = true;

    /// Snapshots must share state/action spaces, gamma and rewards on common
    /// support; change_times must be strictly increasing, one per switch.
    void validate() const;

    /// Snapshot active at the given episode index.
    const MdpSnapshot& active(int episode) const;
};

/// One experienced transition, tagged with the latent parameters of the
/// environment instance that generated it.
struct TransitionRecord {
    StateId state = 0;
    ActionId action = 0;
    double reward = 0.0;
    StateId next = 0;
    LatentTag tag;
};

/// Discounted return sum_t gamma^t r_t with t starting at 0.
/// Empty trajectories yield 0.
double discounted_return(std::span<const TransitionRecord> trajectory, double gamma);
double discounted_return(const std::vector<double>& rewards, double gamma);

/// Standard expected-value Bellman fixed point, iterated until the value
/// function is within `tolerance` of the fixed point in sup-norm.
std::vector<double> exact_value_iteration(const MdpSnapshot& mdp, double tolerance);

/// Worst-case finite-horizon values: at every chance level the distribution
/// collapses onto the supported successor minimizing r(s,a,s') + gamma*V(s'),
/// maximizing over actions at decision levels. Horizon counts backup sweeps.
std::vector<double> pessimistic_value_iteration(const MdpSnapshot& mdp, int horizon);

/// Greedy action per state under the pessimistic horizon-limited criterion;
/// ties broken by first ActionId.
std::vector<ActionId> pessimistic_greedy_policy(const MdpSnapshot& mdp, int horizon);

}  // namespace nsplan
