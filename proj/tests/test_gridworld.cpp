#include <doctest.h>

#include <map>
#include <set>

#include "nsplan/gridworld.hpp"
#include "support/fixtures.hpp"

using namespace nsplan;
using namespace testsupport;

TEST_CASE("layout parsing and validation") {
    const GridLayout layout = GridLayout::from_text("SF\nHG\n", "tiny");
    CHECK(layout.width == 2);
    CHECK(layout.height == 2);
    CHECK(layout.start() == 0);
    CHECK(layout.terminal(2));
    CHECK(layout.terminal(3));
    CHECK(layout.goal(3));
    CHECK(layout.to_text() == "SF\nHG\n");
    CHECK_THROWS(GridLayout::from_text("SF\nFX\n"));
    CHECK_THROWS(GridLayout::from_text("FF\nFG\n"));   // no start
    CHECK_THROWS(GridLayout::from_text("SF\nFF\n"));   // no goal
    CHECK_THROWS(GridLayout::from_text("SFF\nFG\n"));  // ragged
}

TEST_CASE("standard layouts match their descriptions") {
    const auto envs = standard_layouts(0.7);
    REQUIRE(envs.size() == 3);

    const EnvironmentInstance& lake = envs.at("frozen_lake_4x4");
    CHECK(lake.layout().start() == 0);  // top-left
    CHECK(lake.layout().goal(15));      // bottom-right
    int holes = 0;
    for (StateId s = 0; s < 16; ++s)
        if (lake.layout().hole_or_cliff(s)) ++holes;
    CHECK(holes == 4);

    const EnvironmentInstance& cliff = envs.at("cliff_walking");
    CHECK(cliff.layout().width == 12);
    CHECK(cliff.layout().height == 4);
    CHECK(cliff.rewards().step < 0.0);  // per-step penalty
    CHECK(cliff.layout().start() == cliff.layout().state_of(3, 0));
    CHECK(cliff.layout().goal(cliff.layout().state_of(3, 11)));

    const EnvironmentInstance& bridge = envs.at("ns_bridge");
    CHECK(bridge.slip().kind == SlipModel::Kind::Opposite);
    const GridLayout& layout = bridge.layout();
    // every cell of any start-to-goal path is adjacent to a hole
    for (StateId s = 0; s < layout.num_states(); ++s) {
        if (layout.terminal(s)) continue;
        bool next_to_hole = false;
        const int row = layout.row_of(s), col = layout.col_of(s);
        for (const auto& [dr, dc] : std::vector<std::pair<int, int>>{
                 {-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
            const int nr = row + dr, nc = col + dc;
            if (nr < 0 || nr >= layout.height || nc < 0 || nc >= layout.width) continue;
            if (layout.hole_or_cliff(layout.state_of(nr, nc))) next_to_hole = true;
        }
        CHECK_MESSAGE(next_to_hole, "cell ", s, " has no adjacent hole");
    }
    // no entirely safe policy: every action from the start can end in a hole
    for (ActionId a = 0; a < kNumMoves; ++a) {
        bool risky = false;
        for (StateId succ : bridge.reachable_successors(layout.start(), a))
            if (layout.hole_or_cliff(succ)) risky = true;
        CHECK_MESSAGE(risky, "start action ", a, " is entirely safe");
    }
}

TEST_CASE("build_mdp realizes the slip models") {
    const EnvironmentInstance lake = make_environment("frozen_lake_4x4", 1.0);
    const MdpSnapshot deterministic = lake.build_mdp(0.95);
    for (StateId s = 0; s < 16; ++s) {
        if (deterministic.terminal(s)) continue;
        for (ActionId a = 0; a < kNumMoves; ++a)
            CHECK(deterministic.transition(s, a).support_size() == 1);
    }

    // interior cell at p = 0.7: intended 0.7, each perpendicular 0.15
    const EnvironmentInstance lake07 = make_environment("frozen_lake_4x4", 0.7);
    const MdpSnapshot mdp = lake07.build_mdp(0.95);
    const GridLayout& layout = lake07.layout();
    const StateId mid = layout.state_of(2, 1);
    const auto& dist = mdp.transition(mid, static_cast<ActionId>(Move::Down));
    CHECK(dist.prob_of(layout.state_of(3, 1)) == doctest::Approx(0.7));
    CHECK(dist.prob_of(layout.state_of(2, 0)) == doctest::Approx(0.15));
    CHECK(dist.prob_of(layout.state_of(2, 2)) == doctest::Approx(0.15));

    // opposite slips on the bridge: intended 0.4, opposite 0.6
    const EnvironmentInstance bridge = make_environment("ns_bridge", 0.4);
    const GridLayout& bl = bridge.layout();
    const MdpSnapshot bmdp = bridge.build_mdp(0.95);
    const StateId corridor = bl.state_of(2, 3);
    const auto& bdist = bmdp.transition(corridor, static_cast<ActionId>(Move::Right));
    CHECK(bdist.prob_of(bl.state_of(2, 4)) == doctest::Approx(0.4));
    CHECK(bdist.prob_of(bl.state_of(2, 2)) == doctest::Approx(0.6));

    CHECK_THROWS(make_environment("frozen_lake_4x4", 1.3));
    CHECK_THROWS(lake.with_slip(-0.1));
}

TEST_CASE("wall bumps fold probability mass into the current cell") {
    const EnvironmentInstance lake = make_environment("frozen_lake_4x4", 1.0);
    const MdpSnapshot mdp = lake.build_mdp(0.95);
    // moving up from the start corner keeps the agent in place
    const auto& dist = mdp.transition(0, static_cast<ActionId>(Move::Up));
    CHECK(dist.support_size() == 1);
    CHECK(dist.prob_of(0) == doctest::Approx(1.0));

    // at p = 0.7 the bump mass merges with perpendicular outcomes
    const MdpSnapshot mdp07 = lake.with_slip(0.7).build_mdp(0.95);
    const auto& corner = mdp07.transition(0, static_cast<ActionId>(Move::Up));
    CHECK(corner.prob_of(0) == doctest::Approx(0.85));  // bump + left-perp bump
    CHECK(corner.prob_of(1) == doctest::Approx(0.15));
}

TEST_CASE("terminal handling and rewards") {
    const EnvironmentInstance lake = make_environment("frozen_lake_4x4", 0.7);
    const MdpSnapshot mdp = lake.build_mdp(0.95);
    CHECK(mdp.terminal(5));
    CHECK(mdp.transition(5, 0).empty());
    // entering the goal pays the goal reward, holes the hole penalty
    CHECK(mdp.reward(14, static_cast<ActionId>(Move::Right), 15) == doctest::Approx(1.0));
    CHECK(mdp.reward(10, static_cast<ActionId>(Move::Right), 11) == doctest::Approx(-1.0));
    CHECK(mdp.reward(14, static_cast<ActionId>(Move::Left), 13) == doctest::Approx(0.0));
    Rng rng = make_rng(3);
    CHECK_THROWS(lake.step(5, 0, rng));
}

TEST_CASE("step matches build_mdp distributions") {
    const EnvironmentInstance lake = make_environment("frozen_lake_4x4", 1.0);
    Rng rng = make_rng(5);
    for (int i = 0; i < 20; ++i) {
        const auto out = lake.step(0, static_cast<ActionId>(Move::Right), rng);
        CHECK(out.next == 1);
        CHECK(out.terminal == false);
    }
    // wall bump at the grid edge returns the same cell
    for (int i = 0; i < 5; ++i)
        CHECK(lake.step(0, static_cast<ActionId>(Move::Up), rng).next == 0);

    // empirical frequencies within 3 sigma at 1e5 samples
    const EnvironmentInstance lake07 = lake.with_slip(0.7);
    const StateId mid = lake07.layout().state_of(2, 1);
    std::map<StateId, long> counts;
    const long n = 100000;
    for (long i = 0; i < n; ++i)
        counts[lake07.step(mid, static_cast<ActionId>(Move::Down), rng).next] += 1;
    const MdpSnapshot mdp = lake07.build_mdp(0.95);
    for (const auto& e : mdp.transition(mid, static_cast<ActionId>(Move::Down)).entries()) {
        const double sigma = std::sqrt(e.prob * (1.0 - e.prob) * static_cast<double>(n));
        CHECK(std::abs(static_cast<double>(counts[e.state]) - e.prob * n) < 3.0 * sigma);
    }
}

TEST_CASE("empirical step distribution passes a chi-square test on all environments") {
    Rng rng = make_rng(13);
    for (const auto& [name, env] : standard_layouts(0.7)) {
        const MdpSnapshot mdp = env.build_mdp(0.95);
        const StateId start = env.layout().start();
        const ActionId a = static_cast<ActionId>(Move::Up);
        const auto& entries = mdp.transition(start, a).entries();
        std::vector<long> counts(entries.size(), 0);
        std::vector<double> probs;
        for (const auto& e : entries) probs.push_back(e.prob);
        const long n = 100000;
        for (long i = 0; i < n; ++i) {
            const StateId next = env.step(start, a, rng).next;
            for (std::size_t j = 0; j < entries.size(); ++j)
                if (entries[j].state == next) counts[j] += 1;
        }
        if (entries.size() < 2) continue;
        const double stat = chi2_goodness(counts, probs);
        CHECK_MESSAGE(stat < chi2_critical_99(static_cast<int>(entries.size()) - 1),
                      name, ": chi-square ", stat);
    }
}

TEST_CASE("distributions sum to one with bounded support everywhere") {
    for (double p : {0.0, 0.4, 0.7, 1.0}) {
        for (const auto& [name, env] : standard_layouts(p)) {
            const MdpSnapshot mdp = env.build_mdp(0.95);
            const std::size_t max_support =
                env.slip().kind == SlipModel::Kind::Perpendicular ? 3 : 2;
            for (StateId s = 0; s < mdp.num_states(); ++s) {
                if (mdp.terminal(s)) continue;
                for (ActionId a = 0; a < kNumMoves; ++a) {
                    const auto& dist = mdp.transition(s, a);
                    CHECK(dist.support_size() <= max_support);
                    double total = 0.0;
                    for (const auto& e : dist.entries()) total += e.prob;
                    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("opposite slip models mirror under p <-> 1-p") {
    // moving right at p equals moving left at 1-p, distribution-wise
    for (double p : {0.3, 0.4, 0.8}) {
        const EnvironmentInstance bridge = make_environment("ns_bridge", p);
        const EnvironmentInstance mirrored = bridge.with_slip(1.0 - p);
        const MdpSnapshot mdp = bridge.build_mdp(0.95);
        const MdpSnapshot mdp_mirror = mirrored.build_mdp(0.95);
        for (StateId s = 0; s < mdp.num_states(); ++s) {
            if (mdp.terminal(s)) continue;
            const auto& right = mdp.transition(s, static_cast<ActionId>(Move::Right));
            const auto& left = mdp_mirror.transition(s, static_cast<ActionId>(Move::Left));
            REQUIRE(right.support_size() == left.support_size());
            for (const auto& e : right.entries())
                CHECK(left.prob_of(e.state) == doctest::Approx(e.prob));
        }
    }
}

TEST_CASE("environment text round-trip") {
    const EnvironmentInstance bridge = make_environment("ns_bridge", 0.4);
    const std::string text = bridge.to_text();
    const EnvironmentInstance parsed = EnvironmentInstance::from_text(text);
    CHECK(parsed.layout().to_text() == bridge.layout().to_text());
    CHECK(parsed.slip().p == doctest::Approx(0.4));
    CHECK(parsed.slip().kind == SlipModel::Kind::Opposite);
    CHECK(parsed.rewards().hole == doctest::Approx(-1.0));
    // a rebuilt snapshot matches the original
    const MdpSnapshot a = bridge.build_mdp(0.95);
    const MdpSnapshot b = parsed.build_mdp(0.95);
    for (StateId s = 0; s < a.num_states(); ++s) {
        if (a.terminal(s)) continue;
        for (ActionId act = 0; act < kNumMoves; ++act)
            for (const auto& e : a.transition(s, act).entries())
                CHECK(b.transition(s, act).prob_of(e.state) == doctest::Approx(e.prob));
    }
}
