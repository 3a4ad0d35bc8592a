#include <catch2/catch_amalgamated.hpp>

#include <civ/criteria.hpp>
#include <civ/graph.hpp>
#include <civ/msep.hpp>

#include "testutil.hpp"

using civ::Admg;
using civ::CondInstrumentSet;
using civ::NodeSet;
using civ::Verdict;
using testutil::fixture;
using testutil::ns;

namespace {

CondInstrumentSet tuple(const Admg& g, const std::vector<std::string>& z,
                        const std::vector<std::string>& w) {
    return {g.node_set(z), g.node_set(w)};
}

}  // namespace

TEST_CASE("validity report on the g1b worked examples") {
    Admg g = fixture("g1b");
    int x = g.index_of("X"), y = g.index_of("Y");

    auto r1 = civ::is_valid_cis(g, x, y, tuple(g, {"B"}, {"C"}));
    REQUIRE(r1.valid);

    auto r2 = civ::is_valid_cis(g, x, y, tuple(g, {"A"}, {"B", "C"}));
    REQUIRE_FALSE(r2.valid);
    REQUIRE(r2.cond_i);
    REQUIRE_FALSE(r2.cond_ii);  // A carries no information on X unless D is conditioned
    auto r2b = civ::is_valid_cis(g, x, y, tuple(g, {"A"}, {"B", "C", "D"}));
    REQUIRE(r2b.valid);

    auto r3 = civ::is_valid_cis(g, x, y, tuple(g, {"C"}, {}));
    REQUIRE_FALSE(r3.valid);
    REQUIRE(r3.cond_ii);
    REQUIRE_FALSE(r3.cond_iii);
}

TEST_CASE("an empty instrumental set fails condition (ii), not with an error") {
    Admg g = fixture("g1b");
    auto r = civ::is_valid_cis(g, g.index_of("X"), g.index_of("Y"), tuple(g, {}, {"C"}));
    REQUIRE_FALSE(r.valid);
    REQUIRE_FALSE(r.cond_ii);
}

TEST_CASE("tuple validation errors") {
    Admg g = fixture("g1b");
    int x = g.index_of("X"), y = g.index_of("Y");
    REQUIRE_THROWS_AS(civ::is_valid_cis(g, x, y, tuple(g, {"B"}, {"B"})), civ::Error);
    REQUIRE_THROWS_AS(civ::is_valid_cis(g, x, y, tuple(g, {"X"}, {})), civ::Error);
    REQUIRE_THROWS_AS(civ::is_valid_cis(g, x, y, tuple(g, {"B"}, {"Y"})), civ::Error);
}

TEST_CASE("adjustment-set checks on the seven-node appendix graph") {
    Admg g = fixture("g3app");
    int x = g.index_of("V4"), y = g.index_of("V6");
    REQUIRE_FALSE(civ::is_valid_adjustment(g, x, y, ns(g, {"V1"})));
    REQUIRE_FALSE(civ::is_valid_adjustment(g, x, y, NodeSet{}));

    // With the confounding arc removed, any subset of {V1, V2, V3} works.
    Admg gdel = civ::parse_graph(
        "node V1 V2 V3 V4 V5 V6 V7\nV2 -> V1\nV1 -> V4\nV2 -> V3\nV3 -> V6\nV4 -> V5\n"
        "V5 -> V6\nV6 -> V7");
    REQUIRE(civ::is_valid_adjustment(gdel, x, y, ns(gdel, {"V2"})));
    REQUIRE(civ::is_valid_adjustment(gdel, x, y, ns(gdel, {"V1", "V2", "V3"})));
    REQUIRE(civ::is_valid_adjustment(gdel, x, y, NodeSet{}));

    // Forbidden overlap loses immediately.
    REQUIRE_FALSE(civ::is_valid_adjustment(g, x, y, ns(g, {"V5"})));
}

TEST_CASE("enumeration matches the 21-tuple table on g1b") {
    Admg g = fixture("g1b");
    auto tuples = civ::enumerate_valid_cis(g, g.index_of("X"), g.index_of("Y"));
    REQUIRE(tuples.size() == 21);

    auto contains = [&](const std::vector<std::string>& z, const std::vector<std::string>& w) {
        CondInstrumentSet t = tuple(g, z, w);
        return std::find(tuples.begin(), tuples.end(), t) != tuples.end();
    };
    REQUIRE(contains({"A", "B", "D"}, {"C"}));
    REQUIRE(contains({"D"}, {"B"}));
    REQUIRE(contains({"A"}, {"B", "D"}));
    int c = g.index_of("C");
    for (const auto& t : tuples) REQUIRE_FALSE(t.z.contains(c));
}

TEST_CASE("enumeration on g2b returns exactly the five known tuples in order") {
    Admg g = fixture("g2b");
    auto tuples = civ::enumerate_valid_cis(g, g.index_of("X"), g.index_of("Y"));
    std::vector<CondInstrumentSet> expected = {
        tuple(g, {"A"}, {}),  tuple(g, {"A"}, {"B"}),    tuple(g, {"A"}, {"B", "C"}),
        tuple(g, {"B"}, {}),  tuple(g, {"A", "B"}, {}),
    };
    REQUIRE(tuples == expected);
}

TEST_CASE("enumeration on g3app returns exactly the five known tuples") {
    Admg g = fixture("g3app");
    auto tuples = civ::enumerate_valid_cis(g, g.index_of("V4"), g.index_of("V6"));
    std::vector<CondInstrumentSet> expected = {
        tuple(g, {"V1"}, {"V2"}),        tuple(g, {"V1"}, {"V2", "V3"}),
        tuple(g, {"V1"}, {"V3"}),        tuple(g, {"V2"}, {"V3"}),
        tuple(g, {"V1", "V2"}, {"V3"}),
    };
    REQUIRE(tuples == expected);
}

TEST_CASE("enumeration on g2a yields 34 tuples") {
    Admg g = fixture("g2a");
    auto tuples = civ::enumerate_valid_cis(g, g.index_of("X"), g.index_of("Y"));
    REQUIRE(tuples.size() == 34);
}

TEST_CASE("enumeration cap and candidate pool") {
    Admg g = fixture("g1b");
    int x = g.index_of("X"), y = g.index_of("Y");
    NodeSet cand = ns(g, {"B", "C"});
    auto tuples = civ::enumerate_valid_cis(g, x, y, &cand);
    REQUIRE(tuples.size() == 1);  // only (B, {C}) fits inside {B, C}
    REQUIRE(tuples[0] == tuple(g, {"B"}, {"C"}));

    REQUIRE_THROWS_AS(civ::enumerate_valid_cis(g, x, y, nullptr, 3), civ::Error);
}

TEST_CASE("comparison conditions reproduce the worked g2a cases") {
    Admg g = fixture("g2a");
    int x = g.index_of("X"), y = g.index_of("Y");

    // Harmful conditioning: dropping A from the conditioning set wins.
    auto c1 = civ::comparison_conditions(g, x, y, tuple(g, {"D"}, {"A"}), tuple(g, {"D"}, {}));
    REQUIRE(c1.residual_ok);
    REQUIRE(c1.w1_extra_ok);
    REQUIRE(c1.w2_extra_ok);  // void
    REQUIRE(c1.z1_extra_ok);  // void
    REQUIRE(c1.all());

    // Beneficial conditioning: adding C wins via the w2 clause.
    auto c2 = civ::comparison_conditions(g, x, y, tuple(g, {"D"}, {}), tuple(g, {"D"}, {"C"}));
    REQUIRE(c2.all());

    // Ambiguous case on g1b: adding B cannot be ranked.
    Admg g1b = fixture("g1b");
    auto c3 = civ::comparison_conditions(g1b, g1b.index_of("X"), g1b.index_of("Y"),
                                         tuple(g1b, {"D"}, {"C"}),
                                         tuple(g1b, {"D"}, {"B", "C"}));
    REQUIRE_FALSE(c3.w2_extra_ok);
    REQUIRE_FALSE(c3.all());
}

TEST_CASE("compare_cis verdicts") {
    Admg g = fixture("g2a");
    int x = g.index_of("X"), y = g.index_of("Y");

    auto d1 = civ::compare_cis(g, x, y, tuple(g, {"D"}, {"A"}), tuple(g, {"D"}, {}));
    REQUIRE(d1.verdict == Verdict::SecondAtMostFirst);

    auto d2 = civ::compare_cis(g, x, y, tuple(g, {"D"}, {"A", "C"}),
                               tuple(g, {"D"}, {"A", "B", "C"}));
    REQUIRE(d2.verdict == Verdict::Equal);  // B is a neutral covariate here

    Admg g1b = fixture("g1b");
    auto d3 = civ::compare_cis(g1b, g1b.index_of("X"), g1b.index_of("Y"),
                               tuple(g1b, {"D"}, {"C"}), tuple(g1b, {"D"}, {"B", "C"}));
    REQUIRE(d3.verdict == Verdict::Inconclusive);

    auto d4 = civ::compare_cis(g, x, y, tuple(g, {"D"}, {}), tuple(g, {"D"}, {"A"}));
    REQUIRE(d4.verdict == Verdict::FirstAtMostSecond);
}

TEST_CASE("compare_cis rejects unreduced graphs and invalid tuples") {
    Admg g1a = fixture("g1a");
    REQUIRE_THROWS_AS(civ::compare_cis(g1a, g1a.index_of("X"), g1a.index_of("Y"),
                                       tuple(g1a, {"D"}, {"C"}), tuple(g1a, {"B"}, {"C"})),
                      civ::Error);

    Admg g = fixture("g1b");
    REQUIRE_THROWS_AS(civ::compare_cis(g, g.index_of("X"), g.index_of("Y"),
                                       tuple(g, {"C"}, {}), tuple(g, {"B"}, {"C"})),
                      civ::Error);
}

TEST_CASE("with nested instruments and equal conditioning the forward direction always holds") {
    Admg g = fixture("g1b");
    int x = g.index_of("X"), y = g.index_of("Y");
    auto d = civ::compare_cis(g, x, y, tuple(g, {"B"}, {"C"}), tuple(g, {"A", "B"}, {"C"}));
    REQUIRE((d.verdict == Verdict::SecondAtMostFirst || d.verdict == Verdict::Equal));

    // Structural: all four forward conditions are void for Z1 within Z2, same W.
    auto tuples = civ::enumerate_valid_cis(g, x, y);
    for (const auto& t1 : tuples)
        for (const auto& t2 : tuples) {
            if (!(t1.w == t2.w) || !t1.z.is_subset_of(t2.z)) continue;
            auto c = civ::comparison_conditions(g, x, y, t1, t2);
            REQUIRE(c.all());
        }
}

TEST_CASE("moving covariates from conditioning to instruments") {
    Admg g1b = fixture("g1b");
    REQUIRE(civ::suggests_instrument_over_conditioning(
        g1b, g1b.index_of("X"), g1b.index_of("Y"), ns(g1b, {"B", "D"}), ns(g1b, {"C"}),
        ns(g1b, {"A"})));

    Admg g2b = fixture("g2b");
    REQUIRE(civ::suggests_instrument_over_conditioning(
        g2b, g2b.index_of("X"), g2b.index_of("Y"), ns(g2b, {"A"}), NodeSet{}, ns(g2b, {"B"})));

    REQUIRE(civ::suggests_instrument_over_conditioning(
        g2b, g2b.index_of("X"), g2b.index_of("Y"), ns(g2b, {"A"}), NodeSet{}, NodeSet{}));

    REQUIRE_THROWS_AS(civ::suggests_instrument_over_conditioning(
                          g2b, g2b.index_of("X"), g2b.index_of("Y"), ns(g2b, {"B"}), NodeSet{},
                          ns(g2b, {"C"})),
                      civ::Error);
}

TEST_CASE("nodes that may only condition cannot hurt") {
    Admg g1b = fixture("g1b");
    int x = g1b.index_of("X"), y = g1b.index_of("Y");
    REQUIRE(civ::conditioning_cannot_hurt(g1b, x, y, ns(g1b, {"B"}), NodeSet{},
                                          g1b.index_of("C")));

    Admg g2a = fixture("g2a");
    REQUIRE_FALSE(civ::conditioning_cannot_hurt(g2a, g2a.index_of("X"), g2a.index_of("Y"),
                                                ns(g2a, {"D"}), NodeSet{}, g2a.index_of("B")));

    REQUIRE_THROWS_AS(civ::conditioning_cannot_hurt(g1b, x, y, ns(g1b, {"B"}), ns(g1b, {"C"}),
                                                    g1b.index_of("C")),
                      civ::Error);
}

TEST_CASE("validity is invariant under the forbidden projection") {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
        Admg g = testutil::random_admg(seed, 6);
        int x = 0, y = g.num_nodes() - 1;
        NodeSet de_x = civ::descendants(g, NodeSet::single(x));
        if (!de_x.contains(y)) continue;
        NodeSet drop = civ::forbidden_nodes(g, x, y);
        drop.erase(x);
        drop.erase(y);
        Admg proj = civ::latent_projection(g, drop);
        int px = proj.index_of(g.name(x)), py = proj.index_of(g.name(y));

        NodeSet survivors = g.all_nodes().minus(drop);
        survivors.erase(x);
        survivors.erase(y);
        auto in_g = civ::enumerate_valid_cis(g, x, y, &survivors);
        auto in_proj = civ::enumerate_valid_cis(proj, px, py);

        REQUIRE(in_g.size() == in_proj.size());
        for (std::size_t i = 0; i < in_g.size(); ++i) {
            REQUIRE(g.names_of(in_g[i].z) == proj.names_of(in_proj[i].z));
            REQUIRE(g.names_of(in_g[i].w) == proj.names_of(in_proj[i].w));
        }
        ++checked;
    }
    REQUIRE(checked > 30);
}

TEST_CASE("valid tuples that touch descendants of X admit W as an adjustment set") {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Admg g = testutil::random_admg(seed, 6);
        int x = 0, y = g.num_nodes() - 1;
        if (!civ::descendants(g, NodeSet::single(x)).contains(y)) continue;
        NodeSet de_x = civ::descendants(g, NodeSet::single(x));
        for (const auto& t : civ::enumerate_valid_cis(g, x, y)) {
            if (!t.z.unite(t.w).intersects(de_x)) continue;
            REQUIRE(civ::is_valid_adjustment(g, x, y, t.w));
            ++hits;
        }
    }
    REQUIRE(hits > 10);
}
