#pragma once

// Shared fixtures and independent oracles for the test suites. Everything
// here is deliberately written on a different code path than the library
// (plain recursion instead of dynamic programming, BFS instead of planning)
// so oracle agreement is meaningful.

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

#include "nsplan/gridworld.hpp"
#include "nsplan/mdp.hpp"

namespace testsupport {

using namespace nsplan;

inline double mean_of(const std::vector<double>& xs) {
    double total = 0.0;
    for (double x : xs) total += x;
    return total / static_cast<double>(xs.size());
}

inline double median_of(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

inline double stderr_of(const std::vector<double>& xs) {
    const double m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / (xs.size() - 1.0)) / std::sqrt(static_cast<double>(xs.size()));
}

/// Upper critical values of the chi-square distribution at alpha = 0.01.
inline double chi2_critical_99(int dof) {
    static const double table[] = {0.0,     6.6349, 9.2103, 11.3449, 13.2767,
                                   15.0863, 16.8119, 18.4753, 20.0902, 21.6660, 23.2093};
    if (dof < 1 || dof > 10) throw std::invalid_argument("chi2 critical: dof out of table");
    return table[dof];
}

/// Goodness-of-fit statistic for observed counts against expected
/// probabilities (dof = bins - 1).
inline double chi2_goodness(const std::vector<long>& counts, const std::vector<double>& probs) {
    long total = 0;
    for (long c : counts) total += c;
    double stat = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double expected = probs[i] * static_cast<double>(total);
        if (expected <= 0.0) continue;
        const double d = static_cast<double>(counts[i]) - expected;
        stat += d * d / expected;
    }
    return stat;
}

/// Homogeneity statistic for a 2 x K contingency table (dof = K - 1).
inline double chi2_homogeneity(const std::vector<long>& a, const std::vector<long>& b) {
    const std::size_t k = a.size();
    long ta = 0, tb = 0;
    for (long v : a) ta += v;
    for (long v : b) tb += v;
    const double total = static_cast<double>(ta + tb);
    double stat = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double col = static_cast<double>(a[i] + b[i]);
        if (col == 0.0) continue;
        const double ea = col * static_cast<double>(ta) / total;
        const double eb = col * static_cast<double>(tb) / total;
        const double da = static_cast<double>(a[i]) - ea;
        const double db = static_cast<double>(b[i]) - eb;
        stat += da * da / ea + db * db / eb;
    }
    return stat;
}

/// Shortest number of transitions from start to any goal using intended
/// moves only (the p = 1 dynamics), never entering a non-goal terminal.
/// Returns -1 when the goal is unreachable.
inline int bfs_shortest_path(const EnvironmentInstance& env) {
    const GridLayout& layout = env.layout();
    std::vector<int> dist(static_cast<std::size_t>(layout.num_states()), -1);
    std::queue<StateId> frontier;
    dist[static_cast<std::size_t>(layout.start())] = 0;
    frontier.push(layout.start());
    while (!frontier.empty()) {
        const StateId s = frontier.front();
        frontier.pop();
        for (ActionId a = 0; a < kNumMoves; ++a) {
            // intended move only: deterministic limit of the slip model
            const std::vector<StateId> succ = env.reachable_successors(s, a);
            // reachable_successors sorts; recompute the intended cell directly
            const int row = layout.row_of(s), col = layout.col_of(s);
            int nr = row, nc = col;
            switch (static_cast<Move>(a)) {
                case Move::Up: nr = row - 1; break;
                case Move::Down: nr = row + 1; break;
                case Move::Left: nc = col - 1; break;
                case Move::Right: nc = col + 1; break;
            }
            if (nr < 0 || nr >= layout.height || nc < 0 || nc >= layout.width) continue;
            const StateId next = layout.state_of(nr, nc);
            (void)succ;
            if (layout.goal(next)) return dist[static_cast<std::size_t>(s)] + 1;
            if (layout.terminal(next)) continue;
            if (dist[static_cast<std::size_t>(next)] >= 0) continue;
            dist[static_cast<std::size_t>(next)] = dist[static_cast<std::size_t>(s)] + 1;
            frontier.push(next);
        }
    }
    return -1;
}

/// Discounted return of the optimal deterministic path: step rewards on the
/// first d-1 transitions, the goal reward on the last.
inline double bfs_optimal_return(const EnvironmentInstance& env, double gamma) {
    const int d = bfs_shortest_path(env);
    if (d < 1) throw std::logic_error("goal unreachable");
    const RewardScale& r = env.rewards();
    double total = 0.0;
    double disc = 1.0;
    for (int t = 0; t < d - 1; ++t) {
        total += disc * r.step;
        disc *= gamma;
    }
    return total + disc * r.goal;
}

/// Worst-case game value by exhaustive recursion over one-hot successor
/// choices; no tables, no memoization.
inline double pessimistic_game_value(const MdpSnapshot& mdp, StateId s, int depth) {
    if (depth <= 0 || mdp.terminal(s)) return 0.0;
    double best = -1e300;
    for (ActionId a = 0; a < mdp.num_actions(); ++a) {
        const auto& entries = mdp.transition(s, a).entries();
        const auto& rewards = mdp.edge_rewards(s, a);
        double worst = 1e300;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const double v = rewards[i] + mdp.gamma() * pessimistic_game_value(
                                                            mdp, entries[i].state, depth - 1);
            worst = std::min(worst, v);
        }
        best = std::max(best, worst);
    }
    return best;
}

/// Five states: 0 start, 1 high branch, 2 low branch, 3 goal, 4 trap.
/// Action 0 is the risky route, action 1 the safe one. Exact planning
/// prefers the risky arm at the root, worst-case planning the safe arm.
inline MdpSnapshot risky_safe_mdp(double gamma = 0.95) {
    MdpSnapshot mdp(5, 2, gamma);
    mdp.set_terminal(3);
    mdp.set_terminal(4);
    mdp.set_transition(0, 0, {1, 2}, {0.5, 0.5}, {0.0, 0.0});
    mdp.set_transition(0, 1, {2}, {1.0}, {0.05});
    mdp.set_transition(1, 0, {3, 4}, {0.7, 0.3}, {1.0, -1.0});
    mdp.set_transition(1, 1, {3}, {1.0}, {0.3});
    mdp.set_transition(2, 0, {3, 4}, {0.5, 0.5}, {1.0, -1.0});
    mdp.set_transition(2, 1, {3}, {1.0}, {0.2});
    mdp.validate();
    return mdp;
}

struct RiskySafeReference {
    // values for gamma = 0.95, frozen from the closed forms in the fixture
    double exact_q_risky = 0.285;   // 0.5 g 0.4 + 0.5 g 0.2
    double exact_q_safe = 0.24;     // 0.05 + g 0.2
    double pess_q_risky = 0.19;     // g min(0.3, 0.2)
    double pess_q_safe = 0.24;      // 0.05 + g 0.2
};

/// One-state, two-arm bandit with stochastic outcomes. Arm a reaches its
/// good terminal with probability q_a (reward g_a) and its bad terminal
/// otherwise (reward b_a).
inline MdpSnapshot bandit_mdp(double q0, double g0, double b0, double q1, double g1, double b1,
                              double gamma = 0.95) {
    MdpSnapshot mdp(5, 2, gamma);
    for (StateId s = 1; s <= 4; ++s) mdp.set_terminal(s);
    mdp.set_transition(0, 0, {1, 2}, {q0, 1.0 - q0}, {g0, b0});
    mdp.set_transition(0, 1, {3, 4}, {q1, 1.0 - q1}, {g1, b1});
    mdp.validate();
    return mdp;
}

/// Deterministic two-armed bandit: arm rewards r0 and r1.
inline MdpSnapshot deterministic_bandit(double r0, double r1, double gamma = 0.95) {
    MdpSnapshot mdp(3, 2, gamma);
    mdp.set_terminal(1);
    mdp.set_terminal(2);
    mdp.set_transition(0, 0, {1}, {1.0}, {r0});
    mdp.set_transition(0, 1, {2}, {1.0}, {r1});
    mdp.validate();
    return mdp;
}

/// Random small MDP for property tests: every non-terminal (s,a) has one to
/// three successors with random probabilities and rewards in [-1, 1].
inline MdpSnapshot random_mdp(Rng& rng, int num_states = 6, int num_actions = 2,
                              double gamma = 0.9) {
    MdpSnapshot mdp(num_states, num_actions, gamma);
    // last state terminal so returns stay bounded along most paths
    mdp.set_terminal(num_states - 1);
    for (StateId s = 0; s < num_states - 1; ++s) {
        for (ActionId a = 0; a < num_actions; ++a) {
            const int support = 1 + uniform_below(rng, 3);
            std::vector<StateId> succ;
            std::vector<double> prob;
            std::vector<double> reward;
            for (int i = 0; i < support; ++i) {
                StateId next = uniform_below(rng, num_states);
                while (std::find(succ.begin(), succ.end(), next) != succ.end())
                    next = (next + 1) % num_states;
                succ.push_back(next);
                prob.push_back(0.1 + uniform01(rng));
                reward.push_back(uniform01(rng) * 2.0 - 1.0);
            }
            double total = 0.0;
            for (double p : prob) total += p;
            for (double& p : prob) p /= total;
            mdp.set_transition(s, a, succ, prob, reward);
        }
    }
    mdp.validate();
    return mdp;
}

/// The structural support table of a plain MdpSnapshot (tests build beliefs
/// over hand-made MDPs with it).
inline std::vector<std::vector<StateId>> support_of(const MdpSnapshot& mdp) {
    std::vector<std::vector<StateId>> support(
        static_cast<std::size_t>(mdp.num_states()) * static_cast<std::size_t>(mdp.num_actions()));
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        if (mdp.terminal(s)) continue;
        for (ActionId a = 0; a < mdp.num_actions(); ++a) {
            auto& row = support[static_cast<std::size_t>(s) * mdp.num_actions() + a];
            for (const auto& e : mdp.transition(s, a).entries()) row.push_back(e.state);
        }
    }
    return support;
}

}  // namespace testsupport
