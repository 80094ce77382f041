#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "forkwatch/graph.hpp"
#include "forkwatch/propagation.hpp"

namespace fw = forkwatch;

namespace {

fw::NetworkGraph from_edges(int n, std::vector<std::pair<int, int>> edges) {
    std::set<std::pair<int, int>> es;
    for (auto [u, v] : edges) es.insert(std::minmax(u, v));
    return fw::detail::graph_from_edge_set(n, es);
}

}  // namespace

TEST_CASE("mining profile construction and checks") {
    fw::MiningProfile mp = fw::MiningProfile::uniform(10, 0.05);
    REQUIRE(mp.size() == 10);
    CHECK(mp.total == Catch::Approx(0.05).margin(1e-15));
    CHECK(mp.share(3) == Catch::Approx(0.1).margin(1e-15));
    CHECK(mp.is_uniform());

    fw::MiningProfile skew{std::vector<double>{0.01, 0.02, 0.03}};
    CHECK_FALSE(skew.is_uniform());
    CHECK(skew.total == Catch::Approx(0.06).margin(1e-15));
    CHECK(skew.share(2) == Catch::Approx(0.5).margin(1e-12));

    CHECK_THROWS_AS((fw::MiningProfile{std::vector<double>{}}), std::invalid_argument);
    CHECK_THROWS_AS((fw::MiningProfile{std::vector<double>{0.1, 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS((fw::MiningProfile{std::vector<double>{0.3, 0.3}}), std::invalid_argument);
    CHECK_THROWS_AS(fw::MiningProfile::uniform(0, 0.1), std::invalid_argument);
}

TEST_CASE("hop distances on hand-checkable graphs") {
    fw::NetworkGraph tri = from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
    fw::DistanceMatrix dt = fw::all_pairs_hop_distance(tri);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(dt.at(i, j) == (i == j ? 0 : 1));

    fw::NetworkGraph path = from_edges(3, {{0, 1}, {1, 2}});
    fw::DistanceMatrix dp = fw::all_pairs_hop_distance(path);
    CHECK(dp.at(0, 2) == 2);
    CHECK(dp.at(2, 0) == 2);
    CHECK(dp.eccentricity(0) == 2);
    CHECK(dp.eccentricity(1) == 1);

    fw::NetworkGraph c4 = from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
    fw::DistanceMatrix dc = fw::all_pairs_hop_distance(c4);
    CHECK(dc.at(0, 2) == 2);
    CHECK(dc.at(1, 3) == 2);
}

TEST_CASE("hop distances: structural invariants on a generated graph") {
    fw::NetworkGraph g = fw::gen_exponential(60, 3.0, 21);
    fw::DistanceMatrix dm = fw::all_pairs_hop_distance(g);
    for (int i = 0; i < g.n; ++i) {
        CHECK(dm.at(i, i) == 0);
        for (int j = 0; j < g.n; ++j) {
            CHECK(dm.at(i, j) == dm.at(j, i));
            if (i != j) CHECK((dm.at(i, j) == 1) == g.has_edge(i, j));
        }
    }
    // triangle inequality through a handful of midpoints
    for (int i : {0, 7, 31})
        for (int j : {3, 19, 55})
            for (int k : {1, 28, 44})
                CHECK(dm.at(i, j) <= dm.at(i, k) + dm.at(k, j));
}

TEST_CASE("hop distances reject a disconnected graph naming a pair") {
    fw::NetworkGraph split = from_edges(4, {{0, 1}, {2, 3}});
    try {
        fw::all_pairs_hop_distance(split);
        FAIL("expected a throw");
    } catch (const std::invalid_argument& e) {
        std::string msg = e.what();
        CHECK(msg.find("unreachable") != std::string::npos);
        CHECK(msg.find("node") != std::string::npos);
    }
}

TEST_CASE("uninformed-rate profiles on the spec's toy layouts") {
    const double p = 0.01;

    fw::NetworkGraph k5 = fw::gen_regular(5, 4, 1);  // complete graph on 5 nodes
    fw::MiningProfile mp5 = fw::MiningProfile::uniform(5, 5 * p);
    fw::PropagationProfile pk = fw::uninformed_profile(fw::all_pairs_hop_distance(k5), mp5, 2);
    REQUIRE(pk.uninformed_rate.size() == 2);
    CHECK(pk.uninformed_rate[0] == Catch::Approx(4 * p).margin(1e-15));
    CHECK(pk.uninformed_rate[1] == 0.0);
    CHECK(pk.eccentricity == 1);

    fw::NetworkGraph path = from_edges(3, {{0, 1}, {1, 2}});
    fw::MiningProfile mp3 = fw::MiningProfile::uniform(3, 3 * p);
    fw::DistanceMatrix dm = fw::all_pairs_hop_distance(path);

    fw::PropagationProfile end = fw::uninformed_profile(dm, mp3, 0);
    REQUIRE(end.uninformed_rate.size() == 3);
    CHECK(end.uninformed_rate[0] == Catch::Approx(2 * p).margin(1e-15));
    CHECK(end.uninformed_rate[1] == Catch::Approx(p).margin(1e-15));
    CHECK(end.uninformed_rate[2] == 0.0);

    fw::PropagationProfile mid = fw::uninformed_profile(dm, mp3, 1);
    REQUIRE(mid.uninformed_rate.size() == 2);
    CHECK(mid.uninformed_rate[0] == Catch::Approx(2 * p).margin(1e-15));
    CHECK(mid.uninformed_rate[1] == 0.0);
}

TEST_CASE("uninformed-rate profiles: monotonicity and telescoping") {
    fw::NetworkGraph g = fw::gen_regular(50, 4, 3);
    std::vector<double> rates(50);
    for (int i = 0; i < 50; ++i) rates[i] = 0.001 + 0.0001 * (i % 7);
    fw::MiningProfile mp{std::move(rates)};
    fw::DistanceMatrix dm = fw::all_pairs_hop_distance(g);
    for (int origin : {0, 13, 49}) {
        fw::PropagationProfile pp = fw::uninformed_profile(dm, mp, origin);
        CHECK(pp.origin == origin);
        CHECK(pp.uninformed_rate[0] ==
              Catch::Approx(mp.total - mp.rates[origin]).margin(1e-15));
        CHECK(pp.uninformed_rate.back() == 0.0);
        CHECK(static_cast<int>(pp.uninformed_rate.size()) == pp.eccentricity + 1);
        CHECK(pp.eccentricity == dm.eccentricity(origin));
        double drained = 0.0;
        for (std::size_t s = 1; s < pp.uninformed_rate.size(); ++s) {
            CHECK(pp.uninformed_rate[s] <= pp.uninformed_rate[s - 1] + 1e-18);
            drained += pp.uninformed_rate[s - 1] - pp.uninformed_rate[s];
        }
        CHECK(drained == Catch::Approx(mp.total - mp.rates[origin]).margin(1e-12));
    }
}

TEST_CASE("race-time function tau") {
    fw::NetworkGraph path = from_edges(3, {{0, 1}, {1, 2}});
    fw::DistanceMatrix dm = fw::all_pairs_hop_distance(path);
    CHECK(fw::tau(dm, 0, 0, 0) == 0);
    CHECK(fw::tau(dm, 0, 2, 1) == 1);
    CHECK(fw::tau(dm, 0, 1, 2) == -1);  // stays signed: negative = already informed

    // larger t can only move comparisons in favor of the earlier block
    fw::NetworkGraph g = fw::gen_regular(30, 4, 9);
    fw::DistanceMatrix d2 = fw::all_pairs_hop_distance(g);
    for (int k : {0, 11, 29})
        for (int t = 0; t < 5; ++t)
            CHECK(fw::tau(d2, 3, k, t + 1) < fw::tau(d2, 3, k, t));
}
