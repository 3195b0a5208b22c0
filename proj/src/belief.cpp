#include "nsplan/belief.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace nsplan {

void ReplayBuffers::push(const TransitionRecord& rec) {
    global_.push_back(rec);
    if (global_.size() > global_capacity_) global_.pop_front();
    instance_.push_back(rec);
    instance_counts_[{rec.state, rec.action}] += 1;
    if (instance_.size() > instance_capacity_) {
        const TransitionRecord& old = instance_.front();
        auto it = instance_counts_.find({old.state, old.action});
        if (it != instance_counts_.end() && --it->second == 0) instance_counts_.erase(it);
        instance_.pop_front();
    }
}

void ReplayBuffers::reset_instance() {
    instance_.clear();
    instance_counts_.clear();
}

std::vector<StateActionPair> ReplayBuffers::instance_pairs() const {
    std::vector<StateActionPair> pairs;
    pairs.reserve(instance_counts_.size());
    for (const auto& [pair, count] : instance_counts_) pairs.push_back(pair);
    return pairs;
}

namespace {

LatentTag draw_tag(int dim, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    LatentTag tag(static_cast<std::size_t>(dim));
    for (double& v : tag) v = normal(rng);
    return tag;
}

double tag_similarity(const LatentTag& a, const LatentTag& b) {
    double d2 = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    return std::exp(-0.5 * d2);
}

/// One Dirichlet draw: normalized independent gamma variates.
std::vector<double> dirichlet_sample(const std::vector<double>& alpha, Rng& rng) {
    std::vector<double> sample(alpha.size());
    double total = 0.0;
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        std::gamma_distribution<double> gamma(alpha[j], 1.0);
        sample[j] = gamma(rng);
        total += sample[j];
    }
    if (total <= 0.0) {
        std::fill(sample.begin(), sample.end(), 1.0 / static_cast<double>(alpha.size()));
        return sample;
    }
    for (double& v : sample) v /= total;
    return sample;
}

double gini_spread(const std::vector<double>& probs) {
    double spread = 0.0;
    for (double p : probs) spread += p * (1.0 - p);
    return spread;
}

}  // namespace

TransitionBelief::TransitionBelief(int num_states, int num_actions,
                                   std::vector<std::vector<StateId>> support, BeliefConfig cfg,
                                   std::uint64_t seed)
    : num_states_(num_states),
      num_actions_(num_actions),
      cfg_(cfg),
      support_(std::move(support)),
      buffers_(cfg.global_capacity, cfg.instance_capacity) {
    if (support_.size() != static_cast<std::size_t>(num_states) * num_actions)
        throw std::invalid_argument("support table size mismatch");
    if (cfg_.posterior_samples < 2)
        throw std::invalid_argument("posterior sample count must be >= 2");
    instance_obs_.assign(support_.size(), 0);
    Rng rng = make_rng(derive_seed(seed, 0x7a67));
    tag_ = draw_tag(cfg_.latent_dim, rng);
    if (cfg_.backend == BeliefConfig::Backend::Dirichlet) {
        alpha_.resize(support_.size());
        for (std::size_t i = 0; i < support_.size(); ++i)
            alpha_[i].assign(support_[i].size(), 1.0);
    } else {
        member_counts_.assign(static_cast<std::size_t>(cfg_.posterior_samples), {});
        for (auto& member : member_counts_) {
            member.resize(support_.size());
            for (std::size_t i = 0; i < support_.size(); ++i)
                member[i].assign(support_[i].size(), 1.0);
        }
    }
}

TransitionBelief TransitionBelief::transferred_from(const TransitionBelief& prev,
                                                    std::uint64_t seed) {
    TransitionBelief next(prev.num_states_, prev.num_actions_, prev.support_, prev.cfg_, seed);
    const double lambda = prev.cfg_.transfer_lambda;
    if (prev.cfg_.backend == BeliefConfig::Backend::Dirichlet) {
        for (std::size_t i = 0; i < prev.alpha_.size(); ++i)
            for (std::size_t j = 0; j < prev.alpha_[i].size(); ++j)
                next.alpha_[i][j] = 1.0 + lambda * (prev.alpha_[i][j] - 1.0);
    } else {
        next.member_counts_ = prev.member_counts_;
    }
    // general knowledge travels through the global buffer; D_b starts empty
    next.buffers_ = prev.buffers_;
    next.buffers_.reset_instance();
    return next;
}

const std::vector<StateId>& TransitionBelief::support(StateId s, ActionId a) const {
    return support_[index(s, a)];
}

int TransitionBelief::instance_observations(StateId s, ActionId a) const {
    return instance_obs_[index(s, a)];
}

void TransitionBelief::observe(const TransitionRecord& rec) {
    if (rec.state < 0 || rec.state >= num_states_ || rec.action < 0 ||
        rec.action >= num_actions_)
        throw std::invalid_argument("observe: record outside state/action space");
    buffers_.push(rec);
    const std::size_t i = index(rec.state, rec.action);
    if (instance_obs_[i] == 0) visited_.push_back({rec.state, rec.action});
    instance_obs_[i] += 1;
    if (cfg_.backend == BeliefConfig::Backend::Dirichlet) {
        const auto& supp = support_[i];
        auto it = std::lower_bound(supp.begin(), supp.end(), rec.next);
        if (it == supp.end() || *it != rec.next)
            throw std::invalid_argument("observe: successor outside structural support");
        alpha_[i][static_cast<std::size_t>(it - supp.begin())] += 1.0;
    }
}

TransitionRecord TransitionBelief::make_record(StateId s, ActionId a, double reward,
                                               StateId next) const {
    return TransitionRecord{s, a, reward, next, tag_};
}

void TransitionBelief::tune(const TuneConfig& cfg, int episode_index, Rng& rng) {
    if (cfg.interval <= 0 || cfg.threshold <= 0 || cfg.updates <= 0)
        throw std::invalid_argument("tune config fields must be positive");
    if (episode_index % cfg.interval != 0) return;
    if (buffers_.instance().size() < static_cast<std::size_t>(cfg.threshold)) return;
    for (int k = 0; k < cfg.updates; ++k) {
        if (cfg_.backend == BeliefConfig::Backend::BootstrapEnsemble) ensemble_refit_pass(rng);
        ++tune_updates_;
    }
    if (cfg_.backend == BeliefConfig::Backend::BootstrapEnsemble) {
        // one latent refinement step: pull the tag toward the tags of the
        // instance evidence (a labeling mechanism, not a learned embedding)
        LatentTag mean(tag_.size(), 0.0);
        std::size_t n = 0;
        for (const TransitionRecord& rec : buffers_.instance()) {
            for (std::size_t d = 0; d < mean.size() && d < rec.tag.size(); ++d)
                mean[d] += rec.tag[d];
            ++n;
        }
        if (n > 0)
            for (std::size_t d = 0; d < tag_.size(); ++d)
                tag_[d] = 0.9 * tag_[d] + 0.1 * (mean[d] / static_cast<double>(n));
    }
}

void TransitionBelief::ensemble_refit_pass(Rng& rng) {
    const auto& instance = buffers_.instance();
    const auto& global = buffers_.global();
    for (auto& member : member_counts_) {
        for (std::size_t i = 0; i < member.size(); ++i)
            std::fill(member[i].begin(), member[i].end(), 1.0);
        auto add = [&](const TransitionRecord& rec) {
            const std::size_t i = index(rec.state, rec.action);
            const auto& supp = support_[i];
            auto it = std::lower_bound(supp.begin(), supp.end(), rec.next);
            if (it == supp.end() || *it != rec.next) return;
            member[i][static_cast<std::size_t>(it - supp.begin())] += 1.0;
        };
        // bootstrap resample of the instance buffer
        for (std::size_t k = 0; k < instance.size(); ++k)
            add(instance[uniform_below(rng, static_cast<int>(instance.size()))]);
        // global experience, admitted by latent-tag similarity
        for (const TransitionRecord& rec : global) {
            if (uniform01(rng) < tag_similarity(tag_, rec.tag)) add(rec);
        }
    }
}

std::vector<PredictiveSample> TransitionBelief::sample_predictions(StateId s, ActionId a,
                                                                   Rng& rng) const {
    const std::size_t i = index(s, a);
    std::vector<PredictiveSample> out;
    out.reserve(static_cast<std::size_t>(cfg_.posterior_samples));
    if (cfg_.backend == BeliefConfig::Backend::Dirichlet) {
        for (int n = 0; n < cfg_.posterior_samples; ++n) {
            PredictiveSample sample;
            sample.mean = dirichlet_sample(alpha_[i], rng);
            sample.aleatoric = gini_spread(sample.mean);
            out.push_back(std::move(sample));
        }
    } else {
        for (int m = 0; m < cfg_.posterior_samples; ++m) {
            PredictiveSample sample;
            sample.mean = member_weights(s, a, m);
            sample.aleatoric = gini_spread(sample.mean);
            out.push_back(std::move(sample));
        }
    }
    return out;
}

std::vector<double> TransitionBelief::member_weights(StateId s, ActionId a, int member) const {
    const auto& counts = member_counts_[static_cast<std::size_t>(member)][index(s, a)];
    double total = 0.0;
    for (double c : counts) total += c;
    std::vector<double> mean(counts.size());
    for (std::size_t j = 0; j < counts.size(); ++j) mean[j] = counts[j] / total;
    return mean;
}

double TransitionBelief::epistemic_variance(StateId s, ActionId a, Rng& rng) const {
    const int n = cfg_.posterior_samples;
    if (n < 2) throw std::invalid_argument("epistemic variance needs N >= 2 samples");
    const std::vector<PredictiveSample> samples = sample_predictions(s, a, rng);
    const std::size_t dims = samples.front().mean.size();
    if (dims == 0) return 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < dims; ++j) {
        double mean = 0.0;
        for (const auto& sample : samples) mean += sample.mean[j];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const auto& sample : samples) {
            const double d = sample.mean[j] - mean;
            var += d * d;
        }
        total += var / static_cast<double>(n - 1);
    }
    return total / static_cast<double>(dims);
}

double TransitionBelief::epistemic_variance(StateId s, ActionId a, std::uint64_t seed) const {
    Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(index(s, a)), 0xE157));
    return epistemic_variance(s, a, rng);
}

double TransitionBelief::prior_epistemic_variance(StateId s, ActionId a) const {
    const double k = static_cast<double>(support_[index(s, a)].size());
    if (k <= 1.0) return 0.0;
    // mean over dimensions of Var[pi_j] under Dirichlet(1, ..., 1)
    return (k - 1.0) / (k * k * (k + 1.0));
}

double TransitionBelief::aleatoric_average(const std::vector<StateActionPair>& subset,
                                           std::uint64_t seed) const {
    if (subset.empty()) throw std::invalid_argument("aleatoric average over empty subset");
    double total = 0.0;
    for (const auto& [s, a] : subset) {
        Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(index(s, a)), 0xA1EA));
        const std::vector<PredictiveSample> samples = sample_predictions(s, a, rng);
        double mean = 0.0;
        for (const auto& sample : samples) mean += sample.aleatoric;
        total += mean / static_cast<double>(samples.size());
    }
    return total / static_cast<double>(subset.size());
}

std::vector<double> TransitionBelief::mean_distribution(StateId s, ActionId a) const {
    const std::size_t i = index(s, a);
    if (cfg_.backend == BeliefConfig::Backend::Dirichlet) {
        double total = 0.0;
        for (double v : alpha_[i]) total += v;
        std::vector<double> mean(alpha_[i].size());
        for (std::size_t j = 0; j < mean.size(); ++j) mean[j] = alpha_[i][j] / total;
        return mean;
    }
    std::vector<double> mean(support_[i].size(), 0.0);
    for (int m = 0; m < cfg_.posterior_samples; ++m) {
        const std::vector<double> w = member_weights(s, a, m);
        for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += w[j];
    }
    for (double& v : mean) v /= static_cast<double>(cfg_.posterior_samples);
    return mean;
}

StateId TransitionBelief::sample_mean_successor(StateId s, ActionId a, Rng& rng) const {
    const std::size_t i = index(s, a);
    const auto& supp = support_[i];
    if (supp.empty()) throw std::logic_error("sampling successor of a terminal pair");
    if (supp.size() == 1) return supp[0];
    if (cfg_.backend == BeliefConfig::Backend::Dirichlet) {
        double total = 0.0;
        for (double v : alpha_[i]) total += v;
        double u = uniform01(rng) * total;
        for (std::size_t j = 0; j < supp.size(); ++j) {
            u -= alpha_[i][j];
            if (u < 0.0) return supp[j];
        }
        return supp.back();
    }
    const std::vector<double> mean = mean_distribution(s, a);
    double u = uniform01(rng);
    for (std::size_t j = 0; j < supp.size(); ++j) {
        u -= mean[j];
        if (u < 0.0) return supp[j];
    }
    return supp.back();
}

std::pair<double, double> dpas_deltas(const TransitionBelief& current,
                                      const TransitionBelief& previous, StateId s, ActionId a,
                                      const std::vector<StateActionPair>& subset,
                                      std::uint64_t seed) {
    // unvisited pairs report the prior's variance, so unfamiliar regions
    // surface as a positive epistemic delta against a trained baseline
    const double var_cur = current.instance_observations(s, a) == 0
                               ? current.prior_epistemic_variance(s, a)
                               : current.epistemic_variance(s, a, seed);
    const double var_prev = previous.epistemic_variance(s, a, seed);
    const double delta_e = var_cur - var_prev;
    double delta_a = 0.0;
    if (!subset.empty())
        delta_a = current.aleatoric_average(subset, seed) - previous.aleatoric_average(subset, seed);
    return {delta_e, delta_a};
}

void TransitionBelief::save(std::ostream& out) const {
    out.precision(17);
    out << "nsplan-belief 1\n";
    out << "backend "
        << (cfg_.backend == BeliefConfig::Backend::Dirichlet ? "dirichlet" : "ensemble") << "\n";
    out << "shape " << num_states_ << " " << num_actions_ << " " << cfg_.posterior_samples << " "
        << cfg_.transfer_lambda << " " << cfg_.latent_dim << "\n";
    out << "tag";
    for (double v : tag_) out << " " << v;
    out << "\n";
    for (StateId s = 0; s < num_states_; ++s) {
        for (ActionId a = 0; a < num_actions_; ++a) {
            const std::size_t i = index(s, a);
            if (support_[i].empty()) continue;
            out << "pair " << s << " " << a << " " << support_[i].size() << " "
                << instance_obs_[i] << "\n";
            out << "support";
            for (StateId succ : support_[i]) out << " " << succ;
            out << "\n";
            if (cfg_.backend == BeliefConfig::Backend::Dirichlet) {
                out << "alpha";
                for (double v : alpha_[i]) out << " " << v;
                out << "\n";
            } else {
                for (const auto& member : member_counts_) {
                    out << "counts";
                    for (double v : member[i]) out << " " << v;
                    out << "\n";
                }
            }
        }
    }
    out << "end\n";
}

TransitionBelief TransitionBelief::load(std::istream& in) {
    std::string word;
    int version = 0;
    in >> word >> version;
    if (word != "nsplan-belief" || version != 1)
        throw std::invalid_argument("not a belief snapshot");
    std::string backend;
    in >> word >> backend;
    BeliefConfig cfg;
    cfg.backend = backend == "dirichlet" ? BeliefConfig::Backend::Dirichlet
                                         : BeliefConfig::Backend::BootstrapEnsemble;
    int states = 0, actions = 0;
    in >> word >> states >> actions >> cfg.posterior_samples >> cfg.transfer_lambda >>
        cfg.latent_dim;
    in >> word;  // "tag"
    LatentTag tag(static_cast<std::size_t>(cfg.latent_dim));
    for (double& v : tag) in >> v;

    std::vector<std::vector<StateId>> support(
        static_cast<std::size_t>(states) * static_cast<std::size_t>(actions));
    TransitionBelief belief(states, actions, support, cfg, 0);
    belief.tag_ = tag;
    while (in >> word) {
        if (word == "end") break;
        if (word != "pair") throw std::invalid_argument("malformed belief snapshot");
        StateId s;
        ActionId a;
        std::size_t k;
        int obs;
        in >> s >> a >> k >> obs;
        const std::size_t i = belief.index(s, a);
        belief.instance_obs_[i] = obs;
        in >> word;  // "support"
        belief.support_[i].resize(k);
        for (StateId& succ : belief.support_[i]) in >> succ;
        if (cfg.backend == BeliefConfig::Backend::Dirichlet) {
            in >> word;  // "alpha"
            belief.alpha_[i].resize(k);
            for (double& v : belief.alpha_[i]) in >> v;
        } else {
            for (auto& member : belief.member_counts_) {
                in >> word;  // "counts"
                member[i].resize(k);
                for (double& v : member[i]) in >> v;
            }
        }
        if (obs > 0) belief.visited_.push_back({s, a});
    }
    return belief;
}

bool TransitionBelief::operator==(const TransitionBelief& other) const {
    return num_states_ == other.num_states_ && num_actions_ == other.num_actions_ &&
           support_ == other.support_ && alpha_ == other.alpha_ &&
           member_counts_ == other.member_counts_ && tag_ == other.tag_ &&
           instance_obs_ == other.instance_obs_;
}

}  // namespace nsplan
