#include "nsplan/mcts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace nsplan {

double ModelView::reward(StateId s, ActionId a, StateId next) const {
    return structure->reward(s, a, next);
}

std::vector<StateId> ModelView::support(StateId s, ActionId a) const {
    if (ground_truth) {
        const auto& entries = ground_truth->transition(s, a).entries();
        std::vector<StateId> succ;
        succ.reserve(entries.size());
        for (const auto& e : entries) succ.push_back(e.state);
        return succ;
    }
    return belief->support(s, a);
}

StateId ModelView::sample_regular(StateId s, ActionId a, Rng& rng) const {
    if (ground_truth) return ground_truth->transition(s, a).sample(rng);
    return belief->sample_mean_successor(s, a, rng);
}

DecisionNode* ChanceNode::child(StateId s) const {
    for (const auto& [state, node] : children)
        if (state == s) return node;
    return nullptr;
}

DpasGate::DpasGate(const TransitionBelief& current, const TransitionBelief& previous,
                   double epsilon_epistemic, double epsilon_aleatoric, std::uint64_t gate_seed)
    : current_(current),
      previous_(previous),
      eps_e_(epsilon_epistemic),
      eps_a_(epsilon_aleatoric),
      seed_(gate_seed) {
    subset_ = current_.buffers().instance_pairs();
    if (subset_.empty()) {
        // fall back to all pairs visited in this instance; empty at the very
        // onset of a new MDP, where delta_A carries no evidence yet
        subset_ = current_.visited_pairs();
        std::sort(subset_.begin(), subset_.end());
    }
    mode_cache_.assign(static_cast<std::size_t>(current_.num_states()) *
                           static_cast<std::size_t>(current_.num_actions()),
                       -1);
}

double DpasGate::aleatoric_delta() {
    if (!delta_a_.has_value()) {
        if (subset_.empty()) {
            delta_a_ = 0.0;
        } else {
            delta_a_ = current_.aleatoric_average(subset_, seed_) -
                       previous_.aleatoric_average(subset_, seed_);
        }
    }
    return *delta_a_;
}

bool DpasGate::regular(StateId s, ActionId a) {
    const std::size_t i = static_cast<std::size_t>(s) * current_.num_actions() +
                          static_cast<std::size_t>(a);
    if (mode_cache_[i] >= 0) return mode_cache_[i] == 1;
    bool regular_mode;
    if (current_.instance_observations(s, a) == 0) {
        // no evidence from the new environment at this pair: stay pessimistic
        regular_mode = false;
    } else {
        const double var_cur = current_.epistemic_variance(s, a, seed_);
        const double var_prev = previous_.epistemic_variance(s, a, seed_);
        const double delta_e = var_cur - var_prev;
        regular_mode = delta_e <= eps_e_ && aleatoric_delta() <= eps_a_;
    }
    mode_cache_[i] = regular_mode ? 1 : 0;
    return regular_mode;
}

ActionId uct_select(const DecisionNode& node, double exploration) {
    if (!node.expanded || node.actions.empty())
        throw std::logic_error("uct_select on unexpanded node");
    for (std::size_t a = 0; a < node.actions.size(); ++a)
        if (node.actions[a].visits == 0) return static_cast<ActionId>(a);
    const double log_n = std::log(static_cast<double>(node.visits));
    double best = -std::numeric_limits<double>::infinity();
    ActionId best_a = 0;
    for (std::size_t a = 0; a < node.actions.size(); ++a) {
        const ChanceNode& child = node.actions[a];
        const double score =
            child.mean_value() + exploration * std::sqrt(log_n / child.visits);
        if (score > best) {
            best = score;
            best_a = static_cast<ActionId>(a);
        }
    }
    return best_a;
}

StateId sample_successor_worst_case(const ChanceNode& node, const ModelView& view, StateId s,
                                    ActionId a) {
    const std::vector<StateId> support = view.support(s, a);
    if (support.empty()) throw std::logic_error("worst-case sampling with empty support");
    // any supported successor without a valued child is explored first
    for (StateId succ : support) {
        const DecisionNode* child = node.child(succ);
        if (child == nullptr || child->visits == 0) return succ;
    }
    const double gamma = view.gamma();
    double worst = std::numeric_limits<double>::infinity();
    StateId worst_state = support.front();
    for (StateId succ : support) {
        const DecisionNode* child = node.child(succ);
        const double value = view.reward(s, a, succ) + gamma * child->mean_value();
        if (value < worst) {
            worst = value;
            worst_state = succ;
        }
    }
    return worst_state;
}

StateId sample_successor_regular(const ModelView& view, StateId s, ActionId a, Rng& rng) {
    return view.sample_regular(s, a, rng);
}

namespace {

/// Worst supported successor by immediate transition value; used inside
/// rollouts where no subtree values exist yet.
StateId rollout_worst_successor(const ModelView& view, StateId s, ActionId a) {
    const std::vector<StateId> support = view.support(s, a);
    double worst = std::numeric_limits<double>::infinity();
    StateId worst_state = support.front();
    for (StateId succ : support) {
        const double r = view.reward(s, a, succ);
        if (r < worst) {
            worst = r;
            worst_state = succ;
        }
    }
    return worst_state;
}

}  // namespace

TreeSearch::TreeSearch(StateId root_state, ModelView current, const ModelView* previous,
                       SearchConfig cfg)
    : current_(current), previous_(previous), cfg_(cfg), tree_rng_(make_rng(cfg.seed)) {
    if (!current_.valid()) throw std::invalid_argument("invalid current model view");
    if (cfg_.simulations < 1) throw std::invalid_argument("simulation budget must be >= 1");
    if (current_.terminal(root_state))
        throw std::invalid_argument("cannot plan from a terminal state");
    if (cfg_.mode == SearchMode::Adaptive) {
        if (previous_ == nullptr || !previous_->valid() || current_.belief == nullptr ||
            previous_->belief == nullptr)
            throw std::invalid_argument("adaptive search needs current and previous beliefs");
        gate_.emplace(*current_.belief, *previous_->belief, cfg_.epsilon_epistemic,
                      cfg_.epsilon_aleatoric, derive_seed(cfg_.seed, 0x6a7e));
    }
    state_nodes_.assign(static_cast<std::size_t>(current_.structure->num_states()), nullptr);
    root_ = node_for(root_state);
}

DecisionNode* TreeSearch::node_for(StateId state) {
    DecisionNode*& slot = state_nodes_[static_cast<std::size_t>(state)];
    if (slot == nullptr) {
        pool_.emplace_back();
        slot = &pool_.back();
        slot->state = state;
    }
    return slot;
}

StateId TreeSearch::sample_successor(DecisionNode& node, ActionId a, double& reward_out) {
    const StateId s = node.state;
    ChanceNode& chance = node.actions[static_cast<std::size_t>(a)];
    StateId next;
    switch (cfg_.mode) {
        case SearchMode::Vanilla:
            next = sample_successor_regular(current_, s, a, tree_rng_);
            chance.last_mode = 1;
            break;
        case SearchMode::RiskAverse:
            next = sample_successor_worst_case(chance, current_, s, a);
            chance.last_mode = 0;
            break;
        case SearchMode::Adaptive:
            if (gate_->regular(s, a)) {
                ++stats_.regular_samples;
                next = sample_successor_regular(current_, s, a, tree_rng_);
                chance.last_mode = 1;
            } else {
                ++stats_.worst_case_samples;
                next = sample_successor_worst_case(chance, *previous_, s, a);
                chance.last_mode = 0;
            }
            break;
        default:
            throw std::logic_error("unknown search mode");
    }
    reward_out = current_.reward(s, a, next);
    return next;
}

void TreeSearch::simulate() {
    path_.clear();
    DecisionNode* node = root_;
    int depth = 0;
    while (true) {
        if (current_.terminal(node->state)) {
            // the reward for entering this state was paid on the edge
            backpropagate(node, 0.0);
            return;
        }
        if (depth >= cfg_.rollout_depth_cap) {
            // same truncation rule as rollouts: zero value beyond the cap
            backpropagate(node, 0.0);
            return;
        }
        ActionId a;
        if (!node->expanded) {
            node->actions.resize(static_cast<std::size_t>(current_.structure->num_actions()));
            for (ChanceNode& chance : node->actions) {
                chance.prior_visits = cfg_.n_init;
                chance.prior_value_sum = cfg_.q_init * cfg_.n_init;
            }
            node->expanded = true;
            a = 0;  // first action of a fresh node; siblings follow via UCT
        } else {
            a = uct_select(*node, cfg_.exploration);
        }
        double reward = 0.0;
        const StateId next = sample_successor(*node, a, reward);
        ChanceNode& chance = node->actions[static_cast<std::size_t>(a)];
        path_.push_back({node, a, reward});
        DecisionNode* child = chance.child(next);
        if (child == nullptr) {
            const bool fresh = state_nodes_[static_cast<std::size_t>(next)] == nullptr;
            child = node_for(next);
            chance.children.push_back({next, child});
            if (fresh) {
                const double tail = current_.terminal(next) ? 0.0 : rollout(next);
                backpropagate(child, tail);
                return;
            }
        }
        node = child;
        ++depth;
    }
}

double TreeSearch::rollout(StateId s) {
    const double gamma = current_.gamma();
    const int num_actions = current_.structure->num_actions();
    double total = 0.0;
    double disc = 1.0;
    for (int depth = 0; depth < cfg_.rollout_depth_cap; ++depth) {
        const ActionId a = uniform_below(tree_rng_, num_actions);
        StateId next;
        switch (cfg_.mode) {
            case SearchMode::Vanilla:
                next = sample_successor_regular(current_, s, a, tree_rng_);
                break;
            case SearchMode::RiskAverse:
                next = rollout_worst_successor(current_, s, a);
                break;
            case SearchMode::Adaptive:
                if (gate_->regular(s, a)) {
                    ++stats_.regular_samples;
                    next = sample_successor_regular(current_, s, a, tree_rng_);
                } else {
                    ++stats_.worst_case_samples;
                    next = rollout_worst_successor(*previous_, s, a);
                }
                break;
            default:
                throw std::logic_error("unknown search mode");
        }
        total += disc * current_.reward(s, a, next);
        if (current_.terminal(next)) break;
        disc *= gamma;
        s = next;
    }
    return total;
}

void TreeSearch::backpropagate(DecisionNode* leaf, double value) {
    const double gamma = current_.gamma();
    double delta = value;
    leaf->visits += 1;
    leaf->value_sum += delta;
    for (auto it = path_.rbegin(); it != path_.rend(); ++it) {
        // one discount step per MDP transition, applied at the chance hop
        delta = it->reward + gamma * delta;
        ChanceNode& chance = it->node->actions[static_cast<std::size_t>(it->action)];
        chance.visits += 1;
        chance.value_sum += delta;
        it->node->visits += 1;
        it->node->value_sum += delta;
    }
}

PlanResult TreeSearch::run() {
    for (int i = 0; i < cfg_.simulations; ++i) {
        simulate();
        ++stats_.simulations;
    }
    PlanResult result;
    result.policy.resize(root_->actions.size(), 0.0);
    int best_visits = -1;
    for (std::size_t a = 0; a < root_->actions.size(); ++a) {
        const int n = root_->actions[a].visits;
        result.policy[a] = static_cast<double>(n) / root_->visits;
        if (n > best_visits) {
            best_visits = n;
            result.best = static_cast<ActionId>(a);
        }
    }
    result.stats = stats_;
    return result;
}

namespace {

void dump_node(std::ostream& out, const DecisionNode& node, int depth, int max_depth) {
    for (int i = 0; i < depth; ++i) out << "  ";
    out << "s=" << node.state << " n=" << node.visits << " v=" << node.mean_value() << "\n";
    if (depth >= max_depth) return;
    for (std::size_t a = 0; a < node.actions.size(); ++a) {
        const ChanceNode& chance = node.actions[a];
        if (chance.visits == 0) continue;
        for (int i = 0; i <= depth; ++i) out << "  ";
        out << "a=" << a << " n=" << chance.visits << " q=" << chance.mean_value() << " mode="
            << (chance.last_mode < 0 ? "n/a" : (chance.last_mode == 1 ? "regular" : "worst"))
            << "\n";
        for (const auto& [state, child] : chance.children)
            dump_node(out, *child, depth + 1, max_depth);
    }
}

}  // namespace

void TreeSearch::dump(std::ostream& out, int max_depth) const {
    dump_node(out, *root_, 0, max_depth);
}

PlanResult plan(StateId s0, const ModelView& current, const ModelView* previous,
                const SearchConfig& cfg) {
    TreeSearch search(s0, current, previous, cfg);
    return search.run();
}

}  // namespace nsplan
