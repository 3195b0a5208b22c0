#include "nsplan/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>

namespace nsplan {

namespace {
constexpr double kProbTolerance = 1e-9;
}

TransitionDistribution::TransitionDistribution(std::vector<Entry> entries)
    : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.state < b.state; });
    double total = 0.0;
    for (const Entry& e : entries_) {
        if (e.prob < 0.0) throw std::invalid_argument("transition probability < 0");
        total += e.prob;
    }
    if (entries_.empty()) throw std::invalid_argument("transition support is empty");
    if (std::abs(total - 1.0) > kProbTolerance)
        throw std::invalid_argument("transition probabilities do not sum to 1");
}

double TransitionDistribution::prob_of(StateId s) const {
    for (const Entry& e : entries_)
        if (e.state == s) return e.prob;
    return 0.0;
}

StateId TransitionDistribution::sample(Rng& rng) const {
    double u = uniform01(rng);
    for (const Entry& e : entries_) {
        u -= e.prob;
        if (u < 0.0) return e.state;
    }
    return entries_.back().state;
}

MdpSnapshot::MdpSnapshot(int num_states, int num_actions, double gamma)
    : num_states_(num_states), num_actions_(num_actions), gamma_(gamma) {
    if (num_states <= 0 || num_actions <= 0)
        throw std::invalid_argument("state/action counts must be positive");
    if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("gamma must lie in [0,1)");
    terminal_.assign(static_cast<std::size_t>(num_states), 0);
    transitions_.resize(static_cast<std::size_t>(num_states) * num_actions);
    rewards_.resize(transitions_.size());
}

void MdpSnapshot::set_terminal(StateId s, bool terminal) {
    terminal_[static_cast<std::size_t>(s)] = terminal ? 1 : 0;
}

void MdpSnapshot::set_transition(StateId s, ActionId a, const std::vector<StateId>& successors,
                                 const std::vector<double>& probs,
                                 const std::vector<double>& rewards) {
    if (successors.size() != probs.size() || successors.size() != rewards.size())
        throw std::invalid_argument("set_transition: mismatched lengths");
    // merge duplicates (wall bumps can map several outcomes to one cell)
    std::map<StateId, std::pair<double, double>> merged;  // state -> (prob, reward)
    for (std::size_t i = 0; i < successors.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        auto it = merged.find(successors[i]);
        if (it == merged.end()) {
            merged[successors[i]] = {probs[i], rewards[i]};
        } else {
            if (std::abs(it->second.second - rewards[i]) > 1e-12)
                throw std::invalid_argument("conflicting rewards for one (s,a,s') edge");
            it->second.first += probs[i];
        }
    }
    std::vector<TransitionDistribution::Entry> entries;
    std::vector<double> edge_rewards;
    entries.reserve(merged.size());
    for (const auto& [state, pr] : merged) {
        entries.push_back({state, pr.first});
        edge_rewards.push_back(pr.second);
    }
    transitions_[index(s, a)] = TransitionDistribution(std::move(entries));
    rewards_[index(s, a)] = std::move(edge_rewards);
}

void MdpSnapshot::validate() const {
    for (StateId s = 0; s < num_states_; ++s) {
        for (ActionId a = 0; a < num_actions_; ++a) {
            const TransitionDistribution& dist = transitions_[index(s, a)];
            if (terminal(s)) {
                if (!dist.empty())
                    throw std::invalid_argument("terminal state has outgoing transitions");
                continue;
            }
            if (dist.empty())
                throw std::invalid_argument("missing transition for non-terminal (s,a)");
            for (const auto& e : dist.entries())
                if (e.state < 0 || e.state >= num_states_)
                    throw std::invalid_argument("successor out of range");
            for (double r : rewards_[index(s, a)])
                if (!std::isfinite(r)) throw std::invalid_argument("non-finite reward");
        }
    }
}

const TransitionDistribution& MdpSnapshot::transition(StateId s, ActionId a) const {
    return transitions_[index(s, a)];
}

double MdpSnapshot::reward(StateId s, ActionId a, StateId next) const {
    const auto& entries = transitions_[index(s, a)].entries();
    for (std::size_t i = 0; i < entries.size(); ++i)
        if (entries[i].state == next) return rewards_[index(s, a)][i];
    throw std::out_of_range("reward: successor not in support");
}

const std::vector<double>& MdpSnapshot::edge_rewards(StateId s, ActionId a) const {
    return rewards_[index(s, a)];
}

void NonStationarySchedule::validate() const {
    if (snapshots.empty()) throw std::invalid_argument("schedule has no snapshots");
    if (change_times.size() + 1 != snapshots.size())
        throw std::invalid_argument("schedule needs one change time per switch");
    for (std::size_t i = 1; i < change_times.size(); ++i)
        if (change_times[i] <= change_times[i - 1])
            throw std::invalid_argument("change times must be strictly increasing");
    const MdpSnapshot& first = snapshots.front();
    for (const MdpSnapshot& snap : snapshots) {
        if (snap.num_states() != first.num_states() || snap.num_actions() != first.num_actions())
            throw std::invalid_argument("snapshots must share state/action spaces");
        if (snap.gamma() != first.gamma())
            throw std::invalid_argument("snapshots must share gamma");
        for (StateId s = 0; s < first.num_states(); ++s) {
            if (snap.terminal(s) != first.terminal(s))
                throw std::invalid_argument("snapshots must share terminal states");
            if (snap.terminal(s)) continue;
            for (ActionId a = 0; a < first.num_actions(); ++a) {
                // rewards must agree on the common support; only transition
                // probabilities are allowed to change
                for (const auto& e : snap.transition(s, a).entries()) {
                    if (first.transition(s, a).prob_of(e.state) > 0.0 &&
                        std::abs(snap.reward(s, a, e.state) - first.reward(s, a, e.state)) > 1e-12)
                        throw std::invalid_argument("snapshots must share rewards");
                }
            }
        }
    }
}

const MdpSnapshot& NonStationarySchedule::active(int episode) const {
    std::size_t k = 0;
    while (k < change_times.size() && episode >= change_times[k]) ++k;
    return snapshots[k];
}

double discounted_return(std::span<const TransitionRecord> trajectory, double gamma) {
    if (gamma <= 0.0 || gamma >= 1.0) throw std::invalid_argument("gamma must lie in (0,1)");
    double total = 0.0;
    double disc = 1.0;
    for (const TransitionRecord& rec : trajectory) {
        total += disc * rec.reward;
        disc *= gamma;
    }
    return total;
}

double discounted_return(const std::vector<double>& rewards, double gamma) {
    if (gamma <= 0.0 || gamma >= 1.0) throw std::invalid_argument("gamma must lie in (0,1)");
    double total = 0.0;
    double disc = 1.0;
    for (double r : rewards) {
        total += disc * r;
        disc *= gamma;
    }
    return total;
}

std::vector<double> exact_value_iteration(const MdpSnapshot& mdp, double tolerance) {
    if (tolerance <= 0.0) throw std::invalid_argument("tolerance must be positive");
    const int n = mdp.num_states();
    const double gamma = mdp.gamma();
    std::vector<double> value(static_cast<std::size_t>(n), 0.0);
    std::vector<double> next(value);
    // residual threshold guaranteeing sup-norm error <= tolerance at the end
    const double stop =
        gamma > 0.0 ? tolerance * (1.0 - gamma) / gamma : tolerance;
    for (int iter = 0; iter < 1000000; ++iter) {
        double residual = 0.0;
        for (StateId s = 0; s < n; ++s) {
            if (mdp.terminal(s)) continue;
            double best = -std::numeric_limits<double>::infinity();
            for (ActionId a = 0; a < mdp.num_actions(); ++a) {
                const auto& entries = mdp.transition(s, a).entries();
                const auto& rewards = mdp.edge_rewards(s, a);
                double q = 0.0;
                for (std::size_t i = 0; i < entries.size(); ++i)
                    q += entries[i].prob * (rewards[i] + gamma * value[entries[i].state]);
                best = std::max(best, q);
            }
            next[static_cast<std::size_t>(s)] = best;
            residual = std::max(residual, std::abs(best - value[static_cast<std::size_t>(s)]));
        }
        value = next;
        if (residual <= stop) break;
    }
    return value;
}

namespace {

double pessimistic_q(const MdpSnapshot& mdp, const std::vector<double>& value, StateId s,
                     ActionId a) {
    const auto& entries = mdp.transition(s, a).entries();
    const auto& rewards = mdp.edge_rewards(s, a);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const StateId next = entries[i].state;
        const double v = mdp.terminal(next) ? 0.0 : value[static_cast<std::size_t>(next)];
        worst = std::min(worst, rewards[i] + mdp.gamma() * v);
    }
    return worst;
}

}  // namespace

std::vector<double> pessimistic_value_iteration(const MdpSnapshot& mdp, int horizon) {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    const int n = mdp.num_states();
    std::vector<double> value(static_cast<std::size_t>(n), 0.0);
    std::vector<double> next(value);
    for (int h = 0; h < horizon; ++h) {
        for (StateId s = 0; s < n; ++s) {
            if (mdp.terminal(s)) continue;
            double best = -std::numeric_limits<double>::infinity();
            for (ActionId a = 0; a < mdp.num_actions(); ++a)
                best = std::max(best, pessimistic_q(mdp, value, s, a));
            next[static_cast<std::size_t>(s)] = best;
        }
        value = next;
    }
    return value;
}

std::vector<ActionId> pessimistic_greedy_policy(const MdpSnapshot& mdp, int horizon) {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    std::vector<double> value = pessimistic_value_iteration(mdp, horizon - 1 >= 1 ? horizon - 1 : 1);
    if (horizon == 1) std::fill(value.begin(), value.end(), 0.0);
    std::vector<ActionId> policy(static_cast<std::size_t>(mdp.num_states()), 0);
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        if (mdp.terminal(s)) continue;
        double best = -std::numeric_limits<double>::infinity();
        ActionId best_a = 0;
        for (ActionId a = 0; a < mdp.num_actions(); ++a) {
            const double q = pessimistic_q(mdp, value, s, a);
            if (q > best) {
                best = q;
                best_a = a;
            }
        }
        policy[static_cast<std::size_t>(s)] = best_a;
    }
    return policy;
}

}  // namespace nsplan
