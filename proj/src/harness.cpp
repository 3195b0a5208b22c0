#include "nsplan/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace nsplan {

namespace {

constexpr std::uint64_t kWarmupTag = 0x77a4;
constexpr std::uint64_t kTransferTag = 0x7f3a;
constexpr std::uint64_t kEnvTag = 0xe4f1;
constexpr std::uint64_t kPlanTag = 0x91ac;
constexpr std::uint64_t kTuneTag = 0x70be;

}  // namespace

std::string planner_name(PlannerKind kind) {
    switch (kind) {
        case PlannerKind::Mcts: return "mcts";
        case PlannerKind::RaMcts: return "ra-mcts";
        case PlannerKind::AdaMcts: return "ada-mcts";
        case PlannerKind::Rats: return "rats";
    }
    return "?";
}

std::string valid_planner_names() { return "mcts, ra-mcts, ada-mcts, rats"; }

PlannerKind planner_from_name(const std::string& name) {
    if (name == "mcts") return PlannerKind::Mcts;
    if (name == "ra-mcts") return PlannerKind::RaMcts;
    if (name == "ada-mcts") return PlannerKind::AdaMcts;
    if (name == "rats") return PlannerKind::Rats;
    throw std::invalid_argument("unknown planner '" + name + "' (valid: " + valid_planner_names() +
                                ")");
}

std::string access_name(ModelAccess access) {
    switch (access) {
        case ModelAccess::GroundTruthCurrent: return "ground-truth-current";
        case ModelAccess::GroundTruthPrevious: return "ground-truth-previous";
        case ModelAccess::LearnedPrevious: return "learned-previous";
        case ModelAccess::Learned: return "learned";
    }
    return "?";
}

ModelAccess access_from_name(const std::string& name) {
    if (name == "ground-truth-current") return ModelAccess::GroundTruthCurrent;
    if (name == "ground-truth-previous") return ModelAccess::GroundTruthPrevious;
    if (name == "learned-previous") return ModelAccess::LearnedPrevious;
    if (name == "learned") return ModelAccess::Learned;
    throw std::invalid_argument(
        "unknown model access '" + name +
        "' (valid: ground-truth-current, ground-truth-previous, learned-previous, learned)");
}

void ScenarioConfig::validate() const {
    if (p_old < 0.0 || p_old > 1.0 || p_new < 0.0 || p_new > 1.0)
        throw std::invalid_argument("slip probabilities must lie in [0,1]");
    if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
    if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
    if (gamma <= 0.0 || gamma >= 1.0) throw std::invalid_argument("gamma must lie in (0,1)");
    const bool learned = model_access == ModelAccess::Learned;
    if (planner == PlannerKind::AdaMcts && !learned)
        throw std::invalid_argument(
            "ada-mcts requires model_access = learned (it maintains its own belief)");
    if (planner != PlannerKind::AdaMcts && learned)
        throw std::invalid_argument(
            "model_access = learned is only valid for ada-mcts; use learned-previous or a "
            "ground-truth mode");
    make_environment(env_name, p_old);  // throws on unknown names
}

std::string ScenarioConfig::cell_id() const {
    std::ostringstream out;
    out << env_name << "/p" << p_new << "/" << planner_name(planner) << "-"
        << access_name(model_access);
    return out.str();
}

void ScenarioConfig::apply_config(const ConfigFile& file) {
    file.require_known_sections({"scenario", "search", "rats", "tune", "belief", "warmup",
                                 "table", "timing"});
    file.require_known_keys("scenario", {"env", "p_old", "p_new", "planner", "model_access",
                                         "episodes", "max_steps", "seed", "gamma", "jobs"});
    file.require_known_keys("search", {"simulations", "exploration", "rollout_depth_cap",
                                       "epsilon_epistemic", "epsilon_aleatoric"});
    file.require_known_keys("rats", {"depth", "leaf_rollouts", "rollout_depth_cap"});
    file.require_known_keys("tune", {"interval", "threshold", "updates"});
    file.require_known_keys("belief", {"backend", "posterior_samples", "transfer_lambda",
                                       "latent_dim", "global_capacity", "instance_capacity"});
    file.require_known_keys("warmup", {"episodes", "simulations"});

    env_name = file.get_string("scenario", "env", env_name);
    p_old = file.get_double("scenario", "p_old", p_old);
    p_new = file.get_double("scenario", "p_new", p_new);
    if (file.has("scenario", "planner"))
        planner = planner_from_name(file.get_string("scenario", "planner", ""));
    if (file.has("scenario", "model_access"))
        model_access = access_from_name(file.get_string("scenario", "model_access", ""));
    episodes = file.get_int("scenario", "episodes", episodes);
    max_steps = file.get_int("scenario", "max_steps", max_steps);
    seed = static_cast<std::uint64_t>(file.get_long("scenario", "seed", static_cast<long>(seed)));
    gamma = file.get_double("scenario", "gamma", gamma);
    jobs = file.get_int("scenario", "jobs", jobs);

    search.simulations = file.get_int("search", "simulations", search.simulations);
    search.exploration = file.get_double("search", "exploration", search.exploration);
    search.rollout_depth_cap =
        file.get_int("search", "rollout_depth_cap", search.rollout_depth_cap);
    search.epsilon_epistemic =
        file.get_double("search", "epsilon_epistemic", search.epsilon_epistemic);
    search.epsilon_aleatoric =
        file.get_double("search", "epsilon_aleatoric", search.epsilon_aleatoric);

    rats.depth = file.get_int("rats", "depth", rats.depth);
    rats.leaf_rollouts = file.get_int("rats", "leaf_rollouts", rats.leaf_rollouts);
    rats.rollout_depth_cap = file.get_int("rats", "rollout_depth_cap", rats.rollout_depth_cap);

    tune.interval = file.get_int("tune", "interval", tune.interval);
    tune.threshold = file.get_int("tune", "threshold", tune.threshold);
    tune.updates = file.get_int("tune", "updates", tune.updates);

    if (file.has("belief", "backend")) {
        const std::string backend = file.get_string("belief", "backend", "dirichlet");
        if (backend == "dirichlet")
            belief.backend = BeliefConfig::Backend::Dirichlet;
        else if (backend == "bootstrap-ensemble")
            belief.backend = BeliefConfig::Backend::BootstrapEnsemble;
        else
            throw std::invalid_argument("unknown belief backend '" + backend +
                                        "' (valid: dirichlet, bootstrap-ensemble)");
    }
    belief.posterior_samples =
        file.get_int("belief", "posterior_samples", belief.posterior_samples);
    belief.transfer_lambda = file.get_double("belief", "transfer_lambda", belief.transfer_lambda);
    belief.latent_dim = file.get_int("belief", "latent_dim", belief.latent_dim);
    belief.global_capacity = static_cast<std::size_t>(
        file.get_long("belief", "global_capacity", static_cast<long>(belief.global_capacity)));
    belief.instance_capacity = static_cast<std::size_t>(file.get_long(
        "belief", "instance_capacity", static_cast<long>(belief.instance_capacity)));

    warmup.episodes = file.get_int("warmup", "episodes", warmup.episodes);
    warmup.simulations = file.get_int("warmup", "simulations", warmup.simulations);
}

ScenarioConfig ScenarioConfig::from_config(const ConfigFile& file) {
    ScenarioConfig cfg;
    cfg.apply_config(file);
    cfg.validate();
    return cfg;
}

void ScenarioResult::finalize() {
    if (episodes.empty()) return;
    double sum = 0.0;
    double time_sum = 0.0;
    long decisions = 0;
    double mode_sum = 0.0;
    for (const EpisodeResult& ep : episodes) {
        sum += ep.discounted_return;
        time_sum += ep.plan_seconds;
        decisions += ep.decisions;
        mode_sum += ep.regular_fraction;
    }
    const double n = static_cast<double>(episodes.size());
    mean_return = sum / n;
    if (episodes.size() >= 2) {
        double ss = 0.0;
        for (const EpisodeResult& ep : episodes) {
            const double d = ep.discounted_return - mean_return;
            ss += d * d;
        }
        stderr_return = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    } else {
        stderr_return = std::numeric_limits<double>::quiet_NaN();
    }
    mean_decision_seconds = decisions > 0 ? time_sum / static_cast<double>(decisions) : 0.0;
    mean_regular_fraction = mode_sum / n;
}

std::vector<double> ScenarioResult::mode_trace() const {
    std::vector<double> trace;
    trace.reserve(episodes.size());
    for (const EpisodeResult& ep : episodes) trace.push_back(ep.regular_fraction);
    return trace;
}

std::vector<std::vector<StateId>> structural_support(const EnvironmentInstance& env) {
    const int states = env.layout().num_states();
    std::vector<std::vector<StateId>> support(
        static_cast<std::size_t>(states) * static_cast<std::size_t>(kNumMoves));
    for (StateId s = 0; s < states; ++s) {
        if (env.layout().terminal(s)) continue;
        for (ActionId a = 0; a < kNumMoves; ++a)
            support[static_cast<std::size_t>(s) * kNumMoves + a] = env.reachable_successors(s, a);
    }
    return support;
}

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
    if (count <= 0) return;
    jobs = std::max(1, std::min(jobs, count));
    if (jobs == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(jobs));
    std::mutex error_mutex;
    std::exception_ptr error;
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&]() {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& worker : workers) worker.join();
    if (error) std::rethrow_exception(error);
}

namespace {

struct WarmupKey {
    std::string env;
    double p_old;
    double gamma;
    std::uint64_t seed;
    int episodes;
    int simulations;
    int max_steps;
    int backend;
    int posterior_samples;
    double transfer_lambda;

    bool operator<(const WarmupKey& other) const {
        return std::tie(env, p_old, gamma, seed, episodes, simulations, max_steps, backend,
                        posterior_samples, transfer_lambda) <
               std::tie(other.env, other.p_old, other.gamma, other.seed, other.episodes,
                        other.simulations, other.max_steps, other.backend,
                        other.posterior_samples, other.transfer_lambda);
    }
};

std::mutex warmup_mutex;
std::map<WarmupKey, std::shared_ptr<const TransitionBelief>> warmup_cache;

std::shared_ptr<const TransitionBelief> build_warmup_belief(const ScenarioConfig& cfg) {
    const EnvironmentInstance env_old = make_environment(cfg.env_name, cfg.p_old);
    const MdpSnapshot snap_old = env_old.build_mdp(cfg.gamma);
    const ModelView view = ModelView::from_snapshot(snap_old);
    auto belief = std::make_shared<TransitionBelief>(env_old.layout().num_states(), kNumMoves,
                                                     structural_support(env_old), cfg.belief,
                                                     derive_seed(cfg.seed, kWarmupTag, 0x1));
    Rng tune_rng = make_rng(derive_seed(cfg.seed, kWarmupTag, kTuneTag));
    for (int ep = 0; ep < cfg.warmup.episodes; ++ep) {
        Rng env_rng = make_rng(derive_seed(cfg.seed, kWarmupTag, kEnvTag,
                                           static_cast<std::uint64_t>(ep)));
        StateId s = env_old.layout().start();
        for (int t = 0; t < cfg.max_steps; ++t) {
            SearchConfig search = cfg.search;
            search.mode = SearchMode::Vanilla;
            search.simulations = cfg.warmup.simulations;
            search.seed = derive_seed(cfg.seed, kWarmupTag, static_cast<std::uint64_t>(ep),
                                      static_cast<std::uint64_t>(t));
            const PlanResult result = plan(s, view, nullptr, search);
            const auto out = env_old.step(s, result.best, env_rng);
            belief->observe(belief->make_record(s, result.best, out.reward, out.next));
            if (out.terminal) break;
            s = out.next;
        }
        belief->tune(cfg.tune, ep, tune_rng);
    }
    return belief;
}

}  // namespace

std::shared_ptr<const TransitionBelief> warmup_belief(const ScenarioConfig& cfg) {
    const WarmupKey key{cfg.env_name,
                        cfg.p_old,
                        cfg.gamma,
                        cfg.seed,
                        cfg.warmup.episodes,
                        cfg.warmup.simulations,
                        cfg.max_steps,
                        static_cast<int>(cfg.belief.backend),
                        cfg.belief.posterior_samples,
                        cfg.belief.transfer_lambda};
    {
        std::lock_guard<std::mutex> lock(warmup_mutex);
        auto it = warmup_cache.find(key);
        if (it != warmup_cache.end()) return it->second;
    }
    auto belief = build_warmup_belief(cfg);
    std::lock_guard<std::mutex> lock(warmup_mutex);
    auto [it, inserted] = warmup_cache.emplace(key, std::move(belief));
    return it->second;
}

namespace {

/// Everything one scenario needs to plan and step, wired per model access.
struct ScenarioModels {
    EnvironmentInstance env_new;
    MdpSnapshot snap_new;
    MdpSnapshot snap_old;
    MdpSnapshot structure;  // full-topology rewards/terminals for belief views
    std::shared_ptr<const TransitionBelief> frozen_prev;  // warm-up belief
    std::unique_ptr<TransitionBelief> adaptive;           // ADA-MCTS working belief
};

ScenarioModels make_models(const ScenarioConfig& cfg) {
    ScenarioModels models;
    models.env_new = make_environment(cfg.env_name, cfg.p_new);
    models.snap_new = models.env_new.build_mdp(cfg.gamma);
    models.snap_old = make_environment(cfg.env_name, cfg.p_old).build_mdp(cfg.gamma);
    // a mid-range slip keeps every structurally reachable successor in
    // support, so reward lookups cover the belief's whole domain
    models.structure = models.env_new.with_slip(0.5).build_mdp(cfg.gamma);
    if (cfg.model_access == ModelAccess::LearnedPrevious ||
        cfg.model_access == ModelAccess::Learned) {
        models.frozen_prev = warmup_belief(cfg);
    }
    if (cfg.model_access == ModelAccess::Learned) {
        models.adaptive = std::make_unique<TransitionBelief>(TransitionBelief::transferred_from(
            *models.frozen_prev, derive_seed(cfg.seed, kTransferTag)));
    }
    return models;
}

struct DecisionOutcome {
    ActionId action = 0;
    double seconds = 0.0;
    SearchStats stats;
};

DecisionOutcome plan_one(const ScenarioConfig& cfg, const ScenarioModels& models, StateId s,
                         std::uint64_t decision_seed) {
    using clock = std::chrono::steady_clock;
    DecisionOutcome out;
    const auto start = clock::now();
    switch (cfg.planner) {
        case PlannerKind::Mcts:
        case PlannerKind::RaMcts: {
            SearchConfig search = cfg.search;
            search.mode =
                cfg.planner == PlannerKind::Mcts ? SearchMode::Vanilla : SearchMode::RiskAverse;
            search.seed = decision_seed;
            ModelView view;
            if (cfg.model_access == ModelAccess::GroundTruthCurrent)
                view = ModelView::from_snapshot(models.snap_new);
            else if (cfg.model_access == ModelAccess::GroundTruthPrevious)
                view = ModelView::from_snapshot(models.snap_old);
            else
                view = ModelView::from_belief(models.structure, *models.frozen_prev);
            const PlanResult result = plan(s, view, nullptr, search);
            out.action = result.best;
            out.stats = result.stats;
            break;
        }
        case PlannerKind::AdaMcts: {
            SearchConfig search = cfg.search;
            search.mode = SearchMode::Adaptive;
            search.seed = decision_seed;
            const ModelView current = ModelView::from_belief(models.structure, *models.adaptive);
            const ModelView previous =
                ModelView::from_belief(models.structure, *models.frozen_prev);
            const PlanResult result = plan(s, current, &previous, search);
            out.action = result.best;
            out.stats = result.stats;
            break;
        }
        case PlannerKind::Rats: {
            RatsConfig rats = cfg.rats;
            rats.seed = decision_seed;
            ModelView view;
            if (cfg.model_access == ModelAccess::GroundTruthCurrent)
                view = ModelView::from_snapshot(models.snap_new);
            else if (cfg.model_access == ModelAccess::GroundTruthPrevious)
                view = ModelView::from_snapshot(models.snap_old);
            else
                view = ModelView::from_belief(models.structure, *models.frozen_prev);
            out.action = rats_plan(s, view, rats);
            break;
        }
    }
    out.seconds = std::chrono::duration<double>(clock::now() - start).count();
    return out;
}

EpisodeResult run_episode(const ScenarioConfig& cfg, ScenarioModels& models, int episode) {
    EpisodeResult result;
    result.episode = episode;
    result.seed = derive_seed(cfg.seed, kEnvTag, static_cast<std::uint64_t>(episode));
    Rng env_rng = make_rng(result.seed);
    StateId s = models.env_new.layout().start();
    std::vector<double> rewards;
    long regular = 0;
    long worst = 0;
    for (int t = 0; t < cfg.max_steps; ++t) {
        const std::uint64_t decision_seed = derive_seed(
            cfg.seed, kPlanTag, static_cast<std::uint64_t>(episode), static_cast<std::uint64_t>(t));
        const DecisionOutcome decision = plan_one(cfg, models, s, decision_seed);
        result.plan_seconds += decision.seconds;
        result.decisions += 1;
        regular += decision.stats.regular_samples;
        worst += decision.stats.worst_case_samples;
        const auto step = models.env_new.step(s, decision.action, env_rng);
        rewards.push_back(step.reward);
        if (models.adaptive) {
            models.adaptive->observe(
                models.adaptive->make_record(s, decision.action, step.reward, step.next));
        }
        result.steps += 1;
        if (step.terminal) break;
        s = step.next;
    }
    result.discounted_return = discounted_return(rewards, cfg.gamma);
    result.regular_fraction =
        (regular + worst) == 0 ? (cfg.planner == PlannerKind::RaMcts ? 0.0 : 1.0)
                               : static_cast<double>(regular) / static_cast<double>(regular + worst);
    return result;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    ScenarioResult result;
    result.config = cfg;
    result.episodes.resize(static_cast<std::size_t>(cfg.episodes));
    if (cfg.planner == PlannerKind::AdaMcts) {
        // adaptation is sequential by nature: the belief evolves across
        // episodes, so an adaptive cell never parallelizes internally
        ScenarioModels models = make_models(cfg);
        Rng tune_rng = make_rng(derive_seed(cfg.seed, kTuneTag));
        for (int ep = 0; ep < cfg.episodes; ++ep) {
            result.episodes[static_cast<std::size_t>(ep)] = run_episode(cfg, models, ep);
            models.adaptive->tune(cfg.tune, ep, tune_rng);
        }
    } else {
        ScenarioModels shared = make_models(cfg);
        parallel_for(cfg.episodes, cfg.jobs, [&](int ep) {
            result.episodes[static_cast<std::size_t>(ep)] = run_episode(cfg, shared, ep);
        });
    }
    result.finalize();
    return result;
}

namespace {

std::vector<ScenarioResult> run_cells(const std::vector<ScenarioConfig>& cells, int jobs) {
    std::vector<ScenarioResult> results(cells.size());
    std::vector<int> adaptive_cells;
    // non-adaptive cells parallelize across episodes internally; adaptive
    // cells are sequential inside, so they parallelize across cells instead
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].planner == PlannerKind::AdaMcts) {
            adaptive_cells.push_back(static_cast<int>(i));
            continue;
        }
        ScenarioConfig cfg = cells[i];
        cfg.jobs = jobs;
        try {
            results[i] = run_scenario(cfg);
        } catch (const std::exception& err) {
            results[i].config = cells[i];
            results[i].error = err.what();
        }
    }
    if (!adaptive_cells.empty() && !cells.empty()) {
        // warm-up beliefs are shared per (env, p_old); build them before the
        // parallel section so cache misses do not stampede
        for (int idx : adaptive_cells) {
            try {
                warmup_belief(cells[static_cast<std::size_t>(idx)]);
            } catch (const std::exception&) {
                // surfaced again by run_scenario below
            }
        }
    }
    parallel_for(static_cast<int>(adaptive_cells.size()), jobs, [&](int k) {
        const int idx = adaptive_cells[static_cast<std::size_t>(k)];
        try {
            results[static_cast<std::size_t>(idx)] =
                run_scenario(cells[static_cast<std::size_t>(idx)]);
        } catch (const std::exception& err) {
            results[static_cast<std::size_t>(idx)].config = cells[static_cast<std::size_t>(idx)];
            results[static_cast<std::size_t>(idx)].error = err.what();
        }
    });
    return results;
}

}  // namespace

MatrixConfig MatrixConfig::from_config(const ConfigFile& file) {
    MatrixConfig cfg;
    cfg.base.apply_config(file);
    file.require_known_keys("table", {"envs", "p_values"});
    cfg.envs = file.get_strings("table", "envs", cfg.envs);
    cfg.p_values = file.get_doubles("table", "p_values", cfg.p_values);
    return cfg;
}

std::vector<ScenarioResult> run_table1(const MatrixConfig& cfg) {
    const std::vector<std::pair<PlannerKind, ModelAccess>> columns = {
        {PlannerKind::Mcts, ModelAccess::GroundTruthCurrent},
        {PlannerKind::Rats, ModelAccess::GroundTruthCurrent},
        {PlannerKind::Mcts, ModelAccess::LearnedPrevious},
        {PlannerKind::Rats, ModelAccess::GroundTruthPrevious},
        {PlannerKind::Rats, ModelAccess::LearnedPrevious},
        {PlannerKind::AdaMcts, ModelAccess::Learned},
    };
    std::vector<ScenarioConfig> cells;
    for (const std::string& env : cfg.envs) {
        for (double p : cfg.p_values) {
            for (const auto& [planner, access] : columns) {
                ScenarioConfig cell = cfg.base;
                cell.env_name = env;
                cell.p_new = p;
                cell.planner = planner;
                cell.model_access = access;
                cells.push_back(cell);
            }
        }
    }
    return run_cells(cells, cfg.base.jobs);
}

std::vector<ScenarioResult> run_ablation(const MatrixConfig& cfg) {
    const std::vector<std::pair<PlannerKind, ModelAccess>> columns = {
        {PlannerKind::Mcts, ModelAccess::LearnedPrevious},
        {PlannerKind::RaMcts, ModelAccess::LearnedPrevious},
        {PlannerKind::AdaMcts, ModelAccess::Learned},
    };
    std::vector<ScenarioConfig> cells;
    for (const std::string& env : cfg.envs) {
        for (double p : cfg.p_values) {
            for (const auto& [planner, access] : columns) {
                ScenarioConfig cell = cfg.base;
                cell.env_name = env;
                cell.p_new = p;
                cell.planner = planner;
                cell.model_access = access;
                cells.push_back(cell);
            }
        }
    }
    return run_cells(cells, cfg.base.jobs);
}

TimingConfig TimingConfig::from_config(const ConfigFile& file) {
    TimingConfig cfg;
    ScenarioConfig base;
    base.apply_config(file);
    file.require_known_keys("timing", {"envs", "p_new", "min_decisions"});
    cfg.envs = file.get_strings("timing", "envs", cfg.envs);
    cfg.p_new = file.get_double("timing", "p_new", cfg.p_new);
    cfg.min_decisions = file.get_int("timing", "min_decisions", cfg.min_decisions);
    cfg.p_old = base.p_old;
    cfg.gamma = base.gamma;
    cfg.max_steps = base.max_steps;
    cfg.seed = base.seed;
    cfg.search = base.search;
    cfg.rats = base.rats;
    cfg.tune = base.tune;
    cfg.belief = base.belief;
    cfg.warmup = base.warmup;
    return cfg;
}

std::vector<TimingRow> run_timing(const TimingConfig& cfg) {
    std::vector<TimingRow> rows;
    for (const std::string& env_name : cfg.envs) {
        TimingRow row;
        row.env = env_name;

        ScenarioConfig ada;
        ada.env_name = env_name;
        ada.p_old = cfg.p_old;
        ada.p_new = cfg.p_new;
        ada.planner = PlannerKind::AdaMcts;
        ada.model_access = ModelAccess::Learned;
        ada.max_steps = cfg.max_steps;
        ada.seed = cfg.seed;
        ada.gamma = cfg.gamma;
        ada.search = cfg.search;
        ada.rats = cfg.rats;
        ada.tune = cfg.tune;
        ada.belief = cfg.belief;
        ada.warmup = cfg.warmup;
        // enough episodes to cover min_decisions even with instant deaths
        ada.episodes = cfg.min_decisions;

        ScenarioModels models = make_models(ada);
        std::vector<double> ada_times;
        Rng tune_rng = make_rng(derive_seed(ada.seed, kTuneTag));
        int episode = 0;
        while (static_cast<int>(ada_times.size()) < cfg.min_decisions) {
            Rng env_rng = make_rng(derive_seed(ada.seed, kEnvTag,
                                               static_cast<std::uint64_t>(episode)));
            StateId s = models.env_new.layout().start();
            for (int t = 0; t < ada.max_steps; ++t) {
                const DecisionOutcome out = plan_one(
                    ada, models, s,
                    derive_seed(ada.seed, kPlanTag, static_cast<std::uint64_t>(episode),
                                static_cast<std::uint64_t>(t)));
                ada_times.push_back(out.seconds);
                const auto step = models.env_new.step(s, out.action, env_rng);
                models.adaptive->observe(
                    models.adaptive->make_record(s, out.action, step.reward, step.next));
                if (step.terminal || static_cast<int>(ada_times.size()) >= cfg.min_decisions)
                    break;
                s = step.next;
            }
            models.adaptive->tune(ada.tune, episode, tune_rng);
            ++episode;
        }

        const EnvironmentInstance env = make_environment(env_name, cfg.p_new);
        const MdpSnapshot snap = env.build_mdp(cfg.gamma);
        RatsConfig rats = cfg.rats;
        rats.seed = derive_seed(cfg.seed, 0x4a75);
        std::vector<double> rats_times;
        {
            using clock = std::chrono::steady_clock;
            const ModelView view = ModelView::from_snapshot(snap);
            Rng env_rng = make_rng(derive_seed(cfg.seed, 0x4a76));
            int decisions = 0;
            std::uint64_t ep = 0;
            while (decisions < cfg.min_decisions) {
                StateId s = env.layout().start();
                for (int t = 0; t < cfg.max_steps && decisions < cfg.min_decisions; ++t) {
                    RatsConfig step_cfg = rats;
                    step_cfg.seed = derive_seed(cfg.seed, ep, static_cast<std::uint64_t>(t));
                    const auto start = clock::now();
                    const ActionId a = rats_plan(s, view, step_cfg);
                    rats_times.push_back(
                        std::chrono::duration<double>(clock::now() - start).count());
                    ++decisions;
                    const auto out = env.step(s, a, env_rng);
                    if (out.terminal) break;
                    s = out.next;
                }
                ++ep;
            }
        }

        auto mean_sd = [](const std::vector<double>& xs) {
            double mean = 0.0;
            for (double x : xs) mean += x;
            mean /= static_cast<double>(xs.size());
            double ss = 0.0;
            for (double x : xs) ss += (x - mean) * (x - mean);
            const double sd = xs.size() > 1 ? std::sqrt(ss / (xs.size() - 1.0)) : 0.0;
            return std::make_pair(mean, sd);
        };
        const auto [ada_mean, ada_sd] = mean_sd(ada_times);
        const auto [rats_mean, rats_sd] = mean_sd(rats_times);
        row.decisions = static_cast<int>(std::min(ada_times.size(), rats_times.size()));
        row.ada_mean_seconds = ada_mean;
        row.ada_sd_seconds = ada_sd;
        row.rats_mean_seconds = rats_mean;
        row.rats_sd_seconds = rats_sd;
        row.speedup = rats_mean > 0.0 ? (rats_mean - ada_mean) / rats_mean : 0.0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace nsplan
