#include "nsplan/rats.hpp"

#include <chrono>
#include <limits>
#include <stdexcept>

namespace nsplan {

namespace {

struct RatsSearch {
    const ModelView& model;
    const RatsConfig& cfg;
    Rng rng;
    long nodes = 0;

    double leaf_value(StateId s) {
        if (cfg.leaf_rollouts <= 0) return 0.0;
        const int num_actions = model.structure->num_actions();
        const double gamma = model.gamma();
        double total = 0.0;
        for (int k = 0; k < cfg.leaf_rollouts; ++k) {
            StateId state = s;
            double ret = 0.0;
            double disc = 1.0;
            for (int depth = 0; depth < cfg.rollout_depth_cap; ++depth) {
                const ActionId a = uniform_below(rng, num_actions);
                const StateId next = model.sample_regular(state, a, rng);
                ret += disc * model.reward(state, a, next);
                if (model.terminal(next)) break;
                disc *= gamma;
                state = next;
            }
            total += ret;
        }
        return total / static_cast<double>(cfg.leaf_rollouts);
    }

    double decision_value(StateId s, int depth) {
        ++nodes;
        if (model.terminal(s)) return 0.0;
        if (depth == 0) return leaf_value(s);
        double best = -std::numeric_limits<double>::infinity();
        for (ActionId a = 0; a < model.structure->num_actions(); ++a)
            best = std::max(best, chance_value(s, a, depth));
        return best;
    }

    double chance_value(StateId s, ActionId a, int depth) {
        const double gamma = model.gamma();
        double worst = std::numeric_limits<double>::infinity();
        for (StateId next : model.support(s, a)) {
            const double v =
                model.reward(s, a, next) + gamma * decision_value(next, depth - 1);
            worst = std::min(worst, v);
        }
        return worst;
    }
};

}  // namespace

std::vector<double> rats_action_values(StateId s0, const ModelView& model, const RatsConfig& cfg,
                                       long* node_counter) {
    if (!model.valid()) throw std::invalid_argument("invalid model view");
    if (cfg.depth < 1) throw std::invalid_argument("rats depth must be >= 1");
    if (model.terminal(s0)) throw std::invalid_argument("cannot plan from a terminal state");
    RatsSearch search{model, cfg, make_rng(cfg.seed)};
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(model.structure->num_actions()));
    for (ActionId a = 0; a < model.structure->num_actions(); ++a)
        values.push_back(search.chance_value(s0, a, cfg.depth));
    if (node_counter) *node_counter += search.nodes;
    return values;
}

ActionId rats_plan(StateId s0, const ModelView& model, const RatsConfig& cfg,
                   long* node_counter) {
    const std::vector<double> values = rats_action_values(s0, model, cfg, node_counter);
    ActionId best = 0;
    for (ActionId a = 1; a < static_cast<ActionId>(values.size()); ++a)
        if (values[static_cast<std::size_t>(a)] > values[static_cast<std::size_t>(best)]) best = a;
    return best;
}

double rats_decision_time(const EnvironmentInstance& env, const ModelView& model,
                          const RatsConfig& cfg, int min_decisions, int max_steps_per_episode) {
    using clock = std::chrono::steady_clock;
    Rng env_rng = make_rng(derive_seed(cfg.seed, 0x3a75));
    int decisions = 0;
    double seconds = 0.0;
    std::uint64_t episode = 0;
    while (decisions < min_decisions) {
        StateId s = env.layout().start();
        RatsConfig step_cfg = cfg;
        for (int t = 0; t < max_steps_per_episode; ++t) {
            step_cfg.seed = derive_seed(cfg.seed, episode, static_cast<std::uint64_t>(t));
            const auto start = clock::now();
            const ActionId a = rats_plan(s, model, step_cfg);
            seconds += std::chrono::duration<double>(clock::now() - start).count();
            ++decisions;
            const auto out = env.step(s, a, env_rng);
            if (out.terminal) break;
            s = out.next;
            if (decisions >= min_decisions) break;
        }
        ++episode;
    }
    return seconds / static_cast<double>(decisions);
}

}  // namespace nsplan
