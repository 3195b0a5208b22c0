#include <doctest.h>

#include <sstream>

#include "nsplan/belief.hpp"
#include "support/fixtures.hpp"

using namespace nsplan;
using namespace testsupport;

namespace {

/// Mean over dimensions of the analytic Dirichlet variance
/// alpha_j (alpha_0 - alpha_j) / (alpha_0^2 (alpha_0 + 1)).
double analytic_dirichlet_variance(const std::vector<double>& alpha) {
    double a0 = 0.0;
    for (double a : alpha) a0 += a;
    double total = 0.0;
    for (double a : alpha) total += a * (a0 - a) / (a0 * a0 * (a0 + 1.0));
    return total / static_cast<double>(alpha.size());
}

/// A one-pair belief over `k` successors with the given pseudo-counts.
TransitionBelief one_pair_belief(const std::vector<double>& alpha, int samples = 10,
                                 std::uint64_t seed = 1) {
    const int k = static_cast<int>(alpha.size());
    std::vector<std::vector<StateId>> support(static_cast<std::size_t>(k) + 1);
    for (StateId s = 0; s < k; ++s) support[0].push_back(s + 1);
    BeliefConfig cfg;
    cfg.posterior_samples = samples;
    TransitionBelief belief(k + 1, 1, support, cfg, seed);
    // raise pseudo-counts by observing (alpha_j - 1) transitions per successor
    for (int j = 0; j < k; ++j)
        for (int c = 0; c < static_cast<int>(alpha[static_cast<std::size_t>(j)]) - 1; ++c)
            belief.observe(belief.make_record(0, 0, 0.0, j + 1));
    return belief;
}

TransitionBelief lake_belief(double p, std::uint64_t seed, int samples = 10) {
    const EnvironmentInstance env = make_environment("frozen_lake_4x4", p);
    std::vector<std::vector<StateId>> support(16 * kNumMoves);
    for (StateId s = 0; s < 16; ++s) {
        if (env.layout().terminal(s)) continue;
        for (ActionId a = 0; a < kNumMoves; ++a)
            support[static_cast<std::size_t>(s) * kNumMoves + a] = env.reachable_successors(s, a);
    }
    BeliefConfig cfg;
    cfg.posterior_samples = samples;
    return TransitionBelief(16, kNumMoves, support, cfg, seed);
}

}  // namespace

TEST_CASE("conjugate update and locality") {
    TransitionBelief belief = one_pair_belief({1.0, 1.0});
    belief.observe(belief.make_record(0, 0, 0.0, 1));
    const auto mean = belief.mean_distribution(0, 0);
    CHECK(mean[0] == doctest::Approx(2.0 / 3.0));
    CHECK(mean[1] == doctest::Approx(1.0 / 3.0));
    CHECK(belief.instance_observations(0, 0) == 1);
    CHECK_THROWS(belief.observe(belief.make_record(0, 0, 0.0, 99)));
    CHECK_THROWS(belief.observe(TransitionRecord{99, 0, 0.0, 1, {}}));
}

TEST_CASE("observe touches only its own pair") {
    TransitionBelief belief = lake_belief(0.7, 3);
    const auto before = belief.mean_distribution(1, 2);
    belief.observe(belief.make_record(0, 1, 0.0, 4));
    CHECK(belief.mean_distribution(1, 2) == before);
    CHECK(belief.instance_observations(1, 2) == 0);
    CHECK(belief.instance_observations(0, 1) == 1);
}

TEST_CASE("posterior mean converges to the generating distribution") {
    const EnvironmentInstance env = make_environment("frozen_lake_4x4", 0.7);
    TransitionBelief belief = lake_belief(0.7, 11);
    const StateId mid = env.layout().state_of(2, 1);
    const ActionId down = static_cast<ActionId>(Move::Down);
    Rng rng = make_rng(17);
    for (int i = 0; i < 1000; ++i) {
        const auto out = env.step(mid, down, rng);
        belief.observe(belief.make_record(mid, down, out.reward, out.next));
    }
    const auto mean = belief.mean_distribution(mid, down);
    const auto support = belief.support(mid, down);
    const MdpSnapshot mdp = env.build_mdp(0.95);
    for (std::size_t j = 0; j < support.size(); ++j)
        CHECK(std::abs(mean[j] - mdp.transition(mid, down).prob_of(support[j])) < 0.03);
}

namespace {

TransitionBelief two_successor_belief(double lambda, int observations) {
    BeliefConfig cfg;
    cfg.transfer_lambda = lambda;
    std::vector<std::vector<StateId>> support(3);
    support[0] = {1, 2};
    TransitionBelief belief(3, 1, support, cfg, 1);
    for (int c = 0; c < observations; ++c) belief.observe(belief.make_record(0, 0, 0.0, 1));
    return belief;
}

}  // namespace

TEST_CASE("weight transfer discounts pseudo-counts toward the prior") {
    TransitionBelief prev = one_pair_belief({9.0, 1.0});

    SUBCASE("lambda 0 resets to the uniform prior") {
        const TransitionBelief src = two_successor_belief(0.0, 8);  // alpha (9, 1)
        const TransitionBelief next = TransitionBelief::transferred_from(src, 2);
        const auto mean = next.mean_distribution(0, 0);
        CHECK(mean[0] == doctest::Approx(0.5));
        CHECK(mean[1] == doctest::Approx(0.5));
        CHECK(next.instance_observations(0, 0) == 0);
        CHECK(next.buffers().instance().empty());
    }

    SUBCASE("lambda 1 preserves mean predictions exactly") {
        const TransitionBelief src = two_successor_belief(1.0, 8);
        const auto before = src.mean_distribution(0, 0);
        const TransitionBelief next = TransitionBelief::transferred_from(src, 2);
        CHECK(next.mean_distribution(0, 0) == before);
        // fresh latent tag, emptied instance buffer
        CHECK(next.latent_tag() != src.latent_tag());
        CHECK(next.buffers().instance().empty());
        CHECK_FALSE(next.buffers().global().empty());  // global history carries over
    }

    SUBCASE("lambda 0.5 gives alpha (5,1) and larger epistemic variance") {
        const TransitionBelief next = TransitionBelief::transferred_from(prev, 2);
        const auto mean = next.mean_distribution(0, 0);
        CHECK(mean[0] == doctest::Approx(5.0 / 6.0));
        CHECK(mean[1] == doctest::Approx(1.0 / 6.0));
        CHECK(analytic_dirichlet_variance({5.0, 1.0}) >
              analytic_dirichlet_variance({9.0, 1.0}));
        // sampled variances agree with the analytic ordering
        TransitionBelief wide_prev = one_pair_belief({9.0, 1.0}, 4000, 5);
        TransitionBelief wide_next = one_pair_belief({5.0, 1.0}, 4000, 5);
        CHECK(wide_next.epistemic_variance(0, 0, std::uint64_t{3}) >
              wide_prev.epistemic_variance(0, 0, std::uint64_t{3}));
    }
}

TEST_CASE("sample_predictions contract") {
    TransitionBelief sharp = one_pair_belief({1000000.0, 1.0});
    Rng rng = make_rng(5);
    const auto samples = sharp.sample_predictions(0, 0, rng);
    CHECK(samples.size() == 10);
    for (const auto& sample : samples) {
        CHECK(sample.mean[0] > 0.999);
        CHECK(sample.aleatoric < 1e-3);
    }

    // E[gini] under Dirichlet(1,1) is 1/3
    TransitionBelief uniform = one_pair_belief({1.0, 1.0});
    double total = 0.0;
    long count = 0;
    Rng rng2 = make_rng(6);
    for (int rep = 0; rep < 10000; ++rep) {
        for (const auto& sample : uniform.sample_predictions(0, 0, rng2)) {
            total += sample.aleatoric;
            ++count;
        }
    }
    CHECK(total / static_cast<double>(count) == doctest::Approx(1.0 / 3.0).epsilon(0.01));
}

TEST_CASE("epistemic variance analytics") {
    // singleton support: all samples identical, variance exactly zero
    TransitionBelief degenerate = one_pair_belief({1.0});
    CHECK(degenerate.epistemic_variance(0, 0, std::uint64_t{1}) == 0.0);

    // Dirichlet(1,1): converges to the analytic 1/12 per dimension
    TransitionBelief wide = one_pair_belief({1.0, 1.0}, 100000);
    CHECK(wide.epistemic_variance(0, 0, std::uint64_t{2}) ==
          doctest::Approx(1.0 / 12.0).epsilon(0.02));

    // concentration shrinks the variance at equal sample count
    TransitionBelief concentrated = one_pair_belief({100.0, 100.0}, 2000);
    TransitionBelief diffuse = one_pair_belief({1.0, 1.0}, 2000);
    CHECK(concentrated.epistemic_variance(0, 0, std::uint64_t{3}) <
          diffuse.epistemic_variance(0, 0, std::uint64_t{3}));

    // prior fallback values
    CHECK(diffuse.prior_epistemic_variance(0, 0) == doctest::Approx(1.0 / 12.0));
    TransitionBelief three = one_pair_belief({1.0, 1.0, 1.0});
    CHECK(three.prior_epistemic_variance(0, 0) == doctest::Approx(2.0 / 36.0));
    CHECK(degenerate.prior_epistemic_variance(0, 0) == 0.0);
}

TEST_CASE("epistemic variance estimates track the analytic Dirichlet variance") {
    Rng seed_rng = make_rng(99);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> alpha;
        const int k = 2 + uniform_below(seed_rng, 3);
        for (int j = 0; j < k; ++j) alpha.push_back(1.0 + uniform_below(seed_rng, 30));
        TransitionBelief belief = one_pair_belief(alpha, 200000, 7 + trial);
        const double estimate = belief.epistemic_variance(0, 0, std::uint64_t{17});
        CHECK(estimate == doctest::Approx(analytic_dirichlet_variance(alpha)).epsilon(0.05));
    }
}

TEST_CASE("aleatoric averages") {
    TransitionBelief sharp = one_pair_belief({1000000.0, 1.0});
    CHECK(sharp.aleatoric_average({{0, 0}}, 1) < 1e-3);
    CHECK_THROWS(sharp.aleatoric_average({}, 1));

    // a two-pair belief: subset average equals the mean of singleton values
    std::vector<std::vector<StateId>> support(4 * 2);
    support[0] = {2, 3};  // (s=0, a=0)
    support[1] = {2, 3};  // (s=0, a=1)
    BeliefConfig cfg;
    TransitionBelief belief(4, 2, support, cfg, 3);
    for (int c = 0; c < 50; ++c) belief.observe(belief.make_record(0, 0, 0.0, 2));
    const double first = belief.aleatoric_average({{0, 0}}, 9);
    const double second = belief.aleatoric_average({{0, 1}}, 9);
    const double both = belief.aleatoric_average({{0, 0}, {0, 1}}, 9);
    CHECK(both == doctest::Approx(0.5 * (first + second)));
}

TEST_CASE("dpas deltas") {
    // identical beliefs: exactly (0, 0) thanks to common random numbers
    TransitionBelief a = one_pair_belief({5.0, 2.0});
    TransitionBelief b = one_pair_belief({5.0, 2.0});
    const auto [de0, da0] = dpas_deltas(a, b, 0, 0, {{0, 0}}, 42);
    CHECK(de0 == 0.0);
    CHECK(da0 == 0.0);

    // fewer observations at (s,a) than previous: positive epistemic delta
    TransitionBelief fresh = one_pair_belief({2.0, 2.0});
    TransitionBelief trained = one_pair_belief({60.0, 30.0});
    const auto [de1, da1] = dpas_deltas(fresh, trained, 0, 0, {{0, 0}}, 42);
    CHECK(de1 > 0.0);
    (void)da1;

    // previous fully trained, current with 1e4 observations: delta within the
    // epistemic threshold
    TransitionBelief heavy_prev = one_pair_belief({7000.0, 3000.0});
    TransitionBelief heavy_cur = one_pair_belief({7001.0, 3001.0});
    const auto [de2, da2] = dpas_deltas(heavy_cur, heavy_prev, 0, 0, {{0, 0}}, 42);
    CHECK(de2 <= 0.02);
    CHECK(std::abs(da2) < 0.01);

    // unvisited pair in the current belief reports the prior variance
    std::vector<std::vector<StateId>> support(4);
    support[0] = {1, 2, 3};
    BeliefConfig cfg;
    TransitionBelief unvisited(4, 1, support, cfg, 5);
    TransitionBelief trained3(4, 1, support, cfg, 6);
    for (int c = 0; c < 5000; ++c) trained3.observe(trained3.make_record(0, 0, 0.0, 1));
    const auto [de3, da3] = dpas_deltas(unvisited, trained3, 0, 0, {{0, 0}}, 42);
    CHECK(de3 == doctest::Approx(unvisited.prior_epistemic_variance(0, 0) -
                                 trained3.epistemic_variance(0, 0, std::uint64_t{42}))
                     .epsilon(1e-9));
    CHECK(de3 > 0.02);
}

TEST_CASE("tune gate follows the schedule") {
    TransitionBelief belief = one_pair_belief({1.0, 1.0});
    Rng rng = make_rng(1);
    TuneConfig cfg;  // interval 5, threshold 50, updates 2

    // below the data threshold nothing happens even on schedule
    for (int i = 0; i < 49; ++i) belief.observe(belief.make_record(0, 0, 0.0, 1));
    belief.tune(cfg, 5, rng);
    CHECK(belief.tune_update_count() == 0);

    // off-schedule episodes never tune
    belief.observe(belief.make_record(0, 0, 0.0, 1));
    belief.tune(cfg, 3, rng);
    CHECK(belief.tune_update_count() == 0);

    // gate open: exactly N_u update passes
    belief.tune(cfg, 5, rng);
    CHECK(belief.tune_update_count() == 2);
    const auto mean = belief.mean_distribution(0, 0);
    belief.tune(cfg, 10, rng);
    CHECK(belief.tune_update_count() == 4);
    CHECK(belief.mean_distribution(0, 0) == mean);  // Dirichlet is already online
}

TEST_CASE("replay buffers evict FIFO at capacity") {
    BeliefConfig cfg;
    cfg.global_capacity = 10;
    cfg.instance_capacity = 5;
    std::vector<std::vector<StateId>> support(2);
    support[0] = {1};
    TransitionBelief belief(2, 1, support, cfg, 1);
    for (int i = 0; i < 12; ++i) belief.observe(belief.make_record(0, 0, 0.0, 1));
    CHECK(belief.buffers().global().size() == 10);
    CHECK(belief.buffers().instance().size() == 5);
    const auto pairs = belief.buffers().instance_pairs();
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0] == StateActionPair{0, 0});
}

TEST_CASE("belief snapshots round-trip through text") {
    TransitionBelief belief = one_pair_belief({4.0, 7.0});
    std::ostringstream out;
    belief.save(out);
    std::istringstream in(out.str());
    const TransitionBelief loaded = TransitionBelief::load(in);
    CHECK(loaded == belief);
    CHECK(loaded.mean_distribution(0, 0) == belief.mean_distribution(0, 0));
}

TEST_CASE("bootstrap-ensemble backend honors the shared interface") {
    const MdpSnapshot mdp = risky_safe_mdp();
    BeliefConfig cfg;
    cfg.backend = BeliefConfig::Backend::BootstrapEnsemble;
    cfg.posterior_samples = 8;
    TransitionBelief belief(mdp.num_states(), mdp.num_actions(), support_of(mdp), cfg, 3);

    Rng rng = make_rng(4);
    const auto before = belief.sample_predictions(0, 0, rng);
    CHECK(before.size() == 8);

    // ensemble defers statistics to tuning
    std::vector<TransitionRecord> observed;
    Rng env_rng = make_rng(9);
    for (int i = 0; i < 120; ++i) {
        const StateId next = mdp.transition(0, 0).sample(env_rng);
        belief.observe(belief.make_record(0, 0, 0.0, next));
    }
    CHECK(belief.mean_distribution(0, 0)[0] == doctest::Approx(0.5));  // untouched prior

    TuneConfig tune;
    tune.threshold = 50;
    belief.tune(tune, 5, rng);
    CHECK(belief.tune_update_count() == 2);
    const auto mean = belief.mean_distribution(0, 0);
    CHECK(mean[0] == doctest::Approx(0.5).epsilon(0.25));  // refit toward the data

    // epistemic variance shrinks as evidence accumulates
    const double var_fresh =
        TransitionBelief(mdp.num_states(), mdp.num_actions(), support_of(mdp), cfg, 3)
            .epistemic_variance(0, 0, std::uint64_t{5});
    CHECK(var_fresh == 0.0);  // identical members before any tuning
    const double var_tuned = belief.epistemic_variance(0, 0, std::uint64_t{5});
    CHECK(var_tuned >= 0.0);

    // transfer copies member parameters
    const TransitionBelief next = TransitionBelief::transferred_from(belief, 11);
    CHECK(next.mean_distribution(0, 0) == belief.mean_distribution(0, 0));
    CHECK(next.buffers().instance().empty());
    (void)observed;
}

TEST_CASE("epistemic variance decreases in median with observations") {
    const std::vector<int> counts = {1, 10, 100, 1000};
    std::vector<std::vector<double>> variances(counts.size());
    for (int seed = 0; seed < 40; ++seed) {
        Rng env_rng = make_rng(1000 + static_cast<std::uint64_t>(seed));
        TransitionBelief belief = one_pair_belief({1.0, 1.0, 1.0}, 10,
                                                  static_cast<std::uint64_t>(seed));
        int observed = 0;
        for (std::size_t level = 0; level < counts.size(); ++level) {
            while (observed < counts[level]) {
                const double u = uniform01(env_rng);
                const StateId next = u < 0.7 ? 1 : (u < 0.85 ? 2 : 3);
                belief.observe(belief.make_record(0, 0, 0.0, next));
                ++observed;
            }
            variances[level].push_back(
                belief.epistemic_variance(0, 0, static_cast<std::uint64_t>(seed * 7 + 1)));
        }
    }
    for (std::size_t level = 1; level < variances.size(); ++level)
        CHECK(median_of(variances[level]) < median_of(variances[level - 1]));
}
