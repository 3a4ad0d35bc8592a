#include <catch2/catch_amalgamated.hpp>

#include <civ/avar.hpp>
#include <civ/criteria.hpp>
#include <civ/greedy.hpp>
#include <civ/sem.hpp>

#include "testutil.hpp"

using civ::Admg;
using civ::CondInstrumentSet;
using civ::GreedyAction;
using civ::GuardSets;
using civ::NodeSet;
using testutil::fixture;
using testutil::ns;

TEST_CASE("greedy growth from (B, {C}) depends on the visiting order") {
    Admg g = fixture("g1b");
    int x = g.index_of("X"), y = g.index_of("Y");
    CondInstrumentSet start{ns(g, {"B"}), ns(g, {"C"})};

    std::vector<int> a_first{g.index_of("A"), g.index_of("D")};
    auto t1 = civ::greedy_forward(g, x, y, start, &a_first);
    REQUIRE(t1.result.z == ns(g, {"B", "D"}));
    REQUIRE(t1.result.w == ns(g, {"C"}));
    REQUIRE(t1.steps.size() == 2);
    REQUIRE(t1.steps[0].action == GreedyAction::Discarded);
    REQUIRE(t1.steps[1].action == GreedyAction::AddedToZ);

    std::vector<int> d_first{g.index_of("D"), g.index_of("A")};
    auto t2 = civ::greedy_forward(g, x, y, start, &d_first);
    REQUIRE(t2.result.z == ns(g, {"A", "B", "D"}));
    REQUIRE(t2.result.w == ns(g, {"C"}));
    REQUIRE(t2.steps[0].action == GreedyAction::AddedToZ);
    REQUIRE(t2.steps[1].action == GreedyAction::AddedToZ);
}

TEST_CASE("guards against the start tuple discard A in both orders") {
    // With the dependence guards pinned to the start sets, A stays independent
    // of X given {B, C} and is discarded even after D joined the instruments.
    Admg g = fixture("g1b");
    int x = g.index_of("X"), y = g.index_of("Y");
    CondInstrumentSet start{ns(g, {"B"}), ns(g, {"C"})};

    std::vector<int> d_first{g.index_of("D"), g.index_of("A")};
    auto t = civ::greedy_forward(g, x, y, start, &d_first, GuardSets::Original);
    REQUIRE(t.result.z == ns(g, {"B", "D"}));
    REQUIRE(t.steps[1].action == GreedyAction::Discarded);

    std::vector<int> a_first{g.index_of("A"), g.index_of("D")};
    auto t2 = civ::greedy_forward(g, x, y, start, &a_first, GuardSets::Original);
    REQUIRE(t2.result.z == ns(g, {"B", "D"}));
}

TEST_CASE("greedy trace records reproducible guard flags") {
    Admg g = fixture("g1b");
    CondInstrumentSet start{ns(g, {"B"}), ns(g, {"C"})};
    std::vector<int> order{g.index_of("D"), g.index_of("A")};
    auto t = civ::greedy_forward(g, g.index_of("X"), g.index_of("Y"), start, &order);
    REQUIRE(t.steps[0].reason == "zv=1,zg=1,wv=0,wg=0");
    REQUIRE(t.steps[1].reason == "zv=1,zg=1,wv=0,wg=0");
    REQUIRE(t.order == order);
}

TEST_CASE("a start tuple covering all candidates returns unchanged") {
    Admg g = fixture("g1b");
    CondInstrumentSet start{ns(g, {"A", "B", "D"}), ns(g, {"C"})};
    auto t = civ::greedy_forward(g, g.index_of("X"), g.index_of("Y"), start);
    REQUIRE(t.steps.empty());
    REQUIRE(t.result == start);
}

TEST_CASE("greedy rejects invalid starts, unreduced graphs and bad orders") {
    Admg g = fixture("g1b");
    int x = g.index_of("X"), y = g.index_of("Y");
    CondInstrumentSet bad{ns(g, {"C"}), NodeSet{}};
    REQUIRE_THROWS_AS(civ::greedy_forward(g, x, y, bad), civ::Error);

    Admg g1a = fixture("g1a");
    CondInstrumentSet start_a{ns(g1a, {"B"}), ns(g1a, {"C"})};
    REQUIRE_THROWS_AS(
        civ::greedy_forward(g1a, g1a.index_of("X"), g1a.index_of("Y"), start_a), civ::Error);

    CondInstrumentSet start{ns(g, {"B"}), ns(g, {"C"})};
    std::vector<int> bad_order{g.index_of("A")};  // D missing
    REQUIRE_THROWS_AS(civ::greedy_forward(g, x, y, start, &bad_order), civ::Error);
}

TEST_CASE("greedy output is valid whenever the start is valid") {
    for (std::uint64_t seed = 0; seed < 120; ++seed) {
        Admg raw = testutil::random_admg(seed, 6);
        int rx = 0, ry = raw.num_nodes() - 1;
        if (!civ::descendants(raw, NodeSet::single(rx)).contains(ry)) continue;
        Admg g = civ::reduce_for_estimation(raw, rx, ry).graph;
        int x = g.index_of(raw.name(rx)), y = g.index_of(raw.name(ry));
        auto tuples = civ::enumerate_valid_cis(g, x, y);
        if (tuples.empty()) continue;
        auto trace = civ::greedy_forward(g, x, y, tuples.front());
        REQUIRE(civ::is_valid_cis(g, x, y, trace.result).valid);
        for (const auto& step : trace.steps) {
            if (step.action == GreedyAction::AddedToZ)
                REQUIRE(step.reason.rfind("zv=1,zg=1", 0) == 0);
            if (step.action == GreedyAction::AddedToW)
                REQUIRE(step.reason.find("wv=1,wg=1") != std::string::npos);
        }
    }
}

TEST_CASE("each accepted greedy step weakly lowers the asymptotic variance") {
    Admg g = fixture("g1b");
    int x = g.index_of("X"), y = g.index_of("Y");
    CondInstrumentSet start{ns(g, {"B"}), ns(g, {"C"})};
    std::vector<int> order{g.index_of("D"), g.index_of("A")};
    auto trace = civ::greedy_forward(g, x, y, start, &order);

    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        auto sem = civ::marginal_linear_sem(civ::random_sem(g, seed));
        civ::CovModel cov = civ::implied_covariance(sem);
        double tau = civ::total_effect(sem, x, y);

        CondInstrumentSet running = start;
        double prev = civ::avar_new_formula(cov, tau, "X", "Y", g.names_of(running.z),
                                            g.names_of(running.w));
        for (const auto& step : trace.steps) {
            if (step.action == GreedyAction::AddedToZ)
                running.z.insert(step.node);
            else if (step.action == GreedyAction::AddedToW)
                running.w.insert(step.node);
            else
                continue;
            double cur = civ::avar_new_formula(cov, tau, "X", "Y", g.names_of(running.z),
                                               g.names_of(running.w));
            REQUIRE(cur <= prev * (1.0 + 1e-9) + 1e-12);
            prev = cur;
        }
    }
}
