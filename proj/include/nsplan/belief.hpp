#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <utility>
#include <vector>

#include "nsplan/mdp.hpp"

namespace nsplan {

using StateActionPair = std::pair<StateId, ActionId>;

struct TuneConfig {
    int interval = 5;    // episodes between tuning calls
    int threshold = 50;  // minimum |D_b| before training starts
    int updates = 2;     // update passes per tuning call
};

struct BeliefConfig {
    enum class Backend { Dirichlet, BootstrapEnsemble };
    Backend backend = Backend::Dirichlet;
    int posterior_samples = 10;  // N
    double transfer_lambda = 0.5;
    int latent_dim = 2;
    std::size_t global_capacity = 100000;
    std::size_t instance_capacity = 50000;
};

/// One posterior draw: a mean transition distribution over the structural
/// support plus its aleatoric spread sum_j mu_j (1 - mu_j).
struct PredictiveSample {
    std::vector<double> mean;
    double aleatoric = 0.0;
};

/// Global buffer D (all instances) and instance buffer D_b (records since the
/// last change signal). Both evict FIFO at capacity.
class ReplayBuffers {
  public:
    ReplayBuffers() = default;
    ReplayBuffers(std::size_t global_capacity, std::size_t instance_capacity)
        : global_capacity_(global_capacity), instance_capacity_(instance_capacity) {}

    void push(const TransitionRecord& rec);
    void reset_instance();

    const std::deque<TransitionRecord>& global() const { return global_; }
    const std::deque<TransitionRecord>& instance() const { return instance_; }

    /// Distinct (s, a) pairs currently present in D_b, sorted.
    std::vector<StateActionPair> instance_pairs() const;

  private:
    std::size_t global_capacity_ = 100000;
    std::size_t instance_capacity_ = 50000;
    std::deque<TransitionRecord> global_;
    std::deque<TransitionRecord> instance_;
    std::map<StateActionPair, int> instance_counts_;
};

/// Posterior belief over the transition function of the current MDP version.
///
/// The Dirichlet backend keeps per-(s,a) pseudo-counts over the structural
/// successor support and updates online. The bootstrap-ensemble backend keeps
/// one count table per ensemble member and refits them from the replay
/// buffers during tuning, mixing in globally buffered experience weighted by
/// latent-tag similarity.
class TransitionBelief {
  public:
    TransitionBelief() = default;
    /// `support[s * num_actions + a]` lists the successors the belief ranges
    /// over for (s, a); empty lists mark terminal rows.
    TransitionBelief(int num_states, int num_actions,
                     std::vector<std::vector<StateId>> support, BeliefConfig cfg,
                     std::uint64_t seed);

    /// Weight transfer: statistics discounted toward the uniform prior by the
    /// transfer factor (alpha' = 1 + lambda (alpha - 1); ensemble parameters
    /// copied). A fresh latent tag is drawn and the instance buffer emptied.
    static TransitionBelief transferred_from(const TransitionBelief& prev, std::uint64_t seed);

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    const BeliefConfig& config() const { return cfg_; }
    const LatentTag& latent_tag() const { return tag_; }
    const ReplayBuffers& buffers() const { return buffers_; }

    const std::vector<StateId>& support(StateId s, ActionId a) const;
    int instance_observations(StateId s, ActionId a) const;
    /// Pairs observed since the last change signal, in first-visit order.
    const std::vector<StateActionPair>& visited_pairs() const { return visited_; }

    /// Appends the record to D and D_b. The Dirichlet backend updates its
    /// pseudo-counts immediately; the ensemble defers to tune().
    void observe(const TransitionRecord& rec);

    /// Makes a record tagged with this belief's latent parameters.
    TransitionRecord make_record(StateId s, ActionId a, double reward, StateId next) const;

    /// Algorithm-gated tuning: a no-op unless episode_index is a multiple of
    /// cfg.interval and |D_b| >= cfg.threshold. Runs cfg.updates passes.
    void tune(const TuneConfig& cfg, int episode_index, Rng& rng);
    long tune_update_count() const { return tune_updates_; }

    /// Exactly N posterior draws for (s, a).
    std::vector<PredictiveSample> sample_predictions(StateId s, ActionId a, Rng& rng) const;

    /// Unbiased sample variance of the N predicted means, averaged across
    /// successor dimensions. Requires N >= 2.
    double epistemic_variance(StateId s, ActionId a, Rng& rng) const;
    double epistemic_variance(StateId s, ActionId a, std::uint64_t seed) const;

    /// Analytic variance of the prior over this pair's support; what
    /// epistemic_variance converges to before any evidence arrives.
    double prior_epistemic_variance(StateId s, ActionId a) const;

    /// Mean over the subset of the per-pair mean sampled aleatoric variance.
    /// Per-pair draws are seeded from (seed, s, a) so that two beliefs
    /// evaluated with the same seed see identical sample noise.
    double aleatoric_average(const std::vector<StateActionPair>& subset, std::uint64_t seed) const;

    /// Posterior mean transition probabilities aligned with support(s, a).
    std::vector<double> mean_distribution(StateId s, ActionId a) const;
    /// Samples a successor from the posterior mean distribution.
    StateId sample_mean_successor(StateId s, ActionId a, Rng& rng) const;

    void save(std::ostream& out) const;
    static TransitionBelief load(std::istream& in);

    bool operator==(const TransitionBelief& other) const;

  private:
    std::size_t index(StateId s, ActionId a) const {
        return static_cast<std::size_t>(s) * static_cast<std::size_t>(num_actions_) +
               static_cast<std::size_t>(a);
    }
    void ensemble_refit_pass(Rng& rng);
    std::vector<double> member_weights(StateId s, ActionId a, int member) const;

    int num_states_ = 0;
    int num_actions_ = 0;
    BeliefConfig cfg_;
    std::vector<std::vector<StateId>> support_;
    // Dirichlet: one alpha vector per (s,a). Ensemble: per member per (s,a).
    std::vector<std::vector<double>> alpha_;
    std::vector<std::vector<std::vector<double>>> member_counts_;
    std::vector<int> instance_obs_;
    std::vector<StateActionPair> visited_;
    LatentTag tag_;
    ReplayBuffers buffers_;
    long tune_updates_ = 0;
};

/// The two DPAS differences of Algorithm 2, evaluated with common random
/// numbers so that identical beliefs yield exactly (0, 0):
///   delta_E = Var_E(current; s,a) - Var_E(previous; s,a)
///   delta_A = mean aleatoric over `subset` under current minus previous.
std::pair<double, double> dpas_deltas(const TransitionBelief& current,
                                      const TransitionBelief& previous, StateId s, ActionId a,
                                      const std::vector<StateActionPair>& subset,
                                      std::uint64_t seed);

}  // namespace nsplan
