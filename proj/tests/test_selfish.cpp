#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <set>

#include "forkwatch/graph.hpp"
#include "forkwatch/selfish.hpp"

namespace fw = forkwatch;

namespace {

fw::NetworkGraph from_edges(int n, std::vector<std::pair<int, int>> edges) {
    std::set<std::pair<int, int>> es;
    for (auto [u, v] : edges) es.insert(std::minmax(u, v));
    return fw::detail::graph_from_edge_set(n, es);
}

fw::NetworkGraph make_star(int n) {
    std::vector<std::pair<int, int>> es;
    for (int i = 1; i < n; ++i) es.push_back({0, i});
    return from_edges(n, es);
}

// Direct Monte-Carlo of the withholding state machine, written independently
// of the stationary solve: walk the lead, settle races by a gamma coin, count
// who ends up owning canonized blocks.
double mc_revenue_share(double alpha, double gamma, long long events, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    long long pool = 0, honest = 0;
    int lead = 0;
    bool race = false;  // the 0' state: one pool block and one honest block public
    for (long long e = 0; e < events; ++e) {
        bool pool_mined = u(eng) < alpha;
        if (race) {
            if (pool_mined) {
                pool += 2;  // pool extends its own branch and publishes
            } else {
                double side = u(eng);
                if (side < gamma) {
                    pool += 1;  // honest extended the pool branch
                    honest += 1;
                } else {
                    honest += 2;
                }
            }
            race = false;
            lead = 0;
            continue;
        }
        if (pool_mined) {
            ++lead;
            continue;
        }
        // honest block found
        if (lead == 0) {
            honest += 1;
        } else if (lead == 1) {
            race = true;  // pool publishes its withheld block, race is on
        } else if (lead == 2) {
            pool += 2;  // pool publishes everything, honest block orphaned
            lead = 0;
        } else {
            pool += 1;  // pool reveals one block, keeps the rest private
            --lead;
        }
    }
    return static_cast<double>(pool) / static_cast<double>(pool + honest);
}

double closed_form_share(double a, double g) {
    double num = a * (1 - a) * (1 - a) * (4 * a + g * (1 - 2 * a)) - a * a * a;
    double den = 1 - a * (1 + (2 - a) * a);
    return num / den;
}

}  // namespace

TEST_CASE("weighted betweenness on toy layouts") {
    fw::NetworkGraph star = make_star(9);
    fw::MiningProfile mp9 = fw::MiningProfile::uniform(9, 0.09);
    CHECK(fw::weighted_betweenness(star, mp9, 0) == 1.0);
    CHECK(fw::weighted_betweenness(star, mp9, 5) == 0.0);

    fw::NetworkGraph p3 = from_edges(3, {{0, 1}, {1, 2}});
    fw::MiningProfile mp3 = fw::MiningProfile::uniform(3, 0.03);
    CHECK(fw::weighted_betweenness(p3, mp3, 0) == 0.0);
    CHECK(fw::weighted_betweenness(p3, mp3, 1) == 1.0);

    fw::NetworkGraph c4 = from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
    fw::MiningProfile mp4 = fw::MiningProfile::uniform(4, 0.04);
    CHECK(fw::weighted_betweenness(c4, mp4, 0) == Catch::Approx(1.0 / 6.0).margin(1e-15));

    fw::NetworkGraph two = from_edges(2, {{0, 1}});
    CHECK(fw::weighted_betweenness(two, fw::MiningProfile::uniform(2, 0.02), 0) == 0.0);
}

TEST_CASE("uniform-rate betweenness equals the unweighted normalized count") {
    std::mt19937_64 eng(31);
    for (int trial = 0; trial < 25; ++trial) {
        int n = 5 + static_cast<int>(eng() % 8);  // 5..12
        fw::NetworkGraph g = fw::gen_exponential(n, 2.5, eng());
        fw::DistanceMatrix dm = fw::all_pairs_hop_distance(g);
        fw::MiningProfile mp = fw::MiningProfile::uniform(n, 0.1);
        int v = static_cast<int>(eng() % n);

        // unweighted: fraction of ordered pairs' shortest paths through v
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            if (i == v) continue;
            for (int j = 0; j < n; ++j) {
                if (j == v || j == i) continue;
                // count shortest i-j paths and those passing v, by dynamic
                // programming over the BFS layering from j
                std::vector<double> total(n, 0.0), via(n, 0.0);
                std::vector<int> order;
                for (int k = 0; k < n; ++k) order.push_back(k);
                std::sort(order.begin(), order.end(),
                          [&](int a, int b) { return dm.at(j, a) < dm.at(j, b); });
                total[j] = 1.0;
                for (int u : order) {
                    if (u == j) continue;
                    for (int w : g.adj[u])
                        if (dm.at(j, w) == dm.at(j, u) - 1) {
                            total[u] += total[w];
                            via[u] += via[w] + (w == v ? total[w] : 0.0);
                        }
                }
                acc += via[i] / total[i];
            }
        }
        double want = acc / (static_cast<double>(n - 1) * (n - 2));
        CHECK(fw::weighted_betweenness(g, mp, v) == Catch::Approx(want).margin(1e-12));
    }
}

TEST_CASE("pool gamma on toy graphs") {
    fw::NetworkGraph c4 = from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
    fw::MiningProfile mp4 = fw::MiningProfile::uniform(4, 0.04);
    CHECK(fw::gamma_sm(c4, mp4, {0}) == Catch::Approx(1.0 / 6.0).margin(1e-15));

    fw::NetworkGraph star = make_star(8);
    fw::MiningProfile mp8 = fw::MiningProfile::uniform(8, 0.08);
    CHECK(fw::gamma_sm(star, mp8, {0}) == 1.0);
    CHECK(fw::gamma_sm(star, mp8, {4}) == 0.0);
    // merging the hub with one leaf keeps every remaining pair routed via it
    CHECK(fw::gamma_sm(star, mp8, {0, 1}) == 1.0);

    fw::NetworkGraph p4 = from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
    fw::MiningProfile mpp = fw::MiningProfile::uniform(4, 0.04);
    CHECK(fw::gamma_sm(p4, mpp, {0}) == 0.0);
    // singleton interior contraction keeps the path shape: 4 of 6 ordered
    // honest pairs route through the pool
    CHECK(fw::gamma_sm(p4, mpp, {1}) == Catch::Approx(2.0 / 3.0).margin(1e-15));
}

TEST_CASE("pool config accounting") {
    fw::MiningProfile mp = fw::MiningProfile::uniform(10, 0.1);
    fw::SelfishConfig sc = fw::SelfishConfig::from_members(mp, {3, 1, 7});
    CHECK(sc.alpha == Catch::Approx(0.3).margin(1e-12));
    CHECK(sc.beta == Catch::Approx(0.7).margin(1e-12));
    CHECK(sc.members == std::vector<int>{1, 3, 7});

    CHECK_THROWS_AS(fw::SelfishConfig::from_members(mp, {}), std::invalid_argument);
    CHECK_THROWS_AS(fw::SelfishConfig::from_members(mp, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(fw::SelfishConfig::from_members(mp, {0, 10}), std::invalid_argument);
    // six of ten uniform nodes put the pool over half the power
    CHECK_THROWS_AS(fw::SelfishConfig::from_members(mp, {0, 1, 2, 3, 4, 5}),
                    std::invalid_argument);
}

TEST_CASE("withholding revenue matches the closed form on a grid") {
    double worst = 0.0;
    for (double a = 0.05; a < 0.46; a += 0.05)
        for (double g : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            double got = fw::selfish_revenue(a, g).revenue_share;
            worst = std::max(worst, std::abs(got - closed_form_share(a, g)));
        }
    CHECK(worst <= 1e-9);

    // classic break-even point and a hand-checked interior value
    CHECK(fw::selfish_revenue(1.0 / 3.0, 0.0).rmg == Catch::Approx(0.0).margin(1e-9));
    CHECK(fw::selfish_revenue(0.25, 1.0).revenue_share == Catch::Approx(0.304878).margin(1e-4));
    CHECK(fw::selfish_revenue(0.25, 1.0).rmg == Catch::Approx(0.2195).margin(1e-3));

    // majority pool owns the chain outright
    CHECK(fw::selfish_revenue(0.5, 0.3).revenue_share == 1.0);
    CHECK(fw::selfish_revenue(0.62, 0.0).revenue_share == 1.0);

    CHECK_THROWS_AS(fw::selfish_revenue(0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(fw::selfish_revenue(1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(fw::selfish_revenue(0.3, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(fw::selfish_revenue(0.3, 1.1), std::invalid_argument);
}

TEST_CASE("withholding revenue agrees with a Monte-Carlo of the state machine") {
    struct Pt {
        double alpha, gamma;
    };
    for (Pt pt : {Pt{0.25, 1.0}, Pt{0.3, 0.5}, Pt{0.4, 0.0}}) {
        double ana = fw::selfish_revenue(pt.alpha, pt.gamma).revenue_share;
        double mc = mc_revenue_share(pt.alpha, pt.gamma, 4'000'000, 99);
        CHECK(std::abs(ana - mc) < 0.004);
    }
}

TEST_CASE("revenue share grows with the tie-win probability") {
    for (double a : {0.1, 0.25, 0.4}) {
        double prev = -1.0;
        for (double g : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            double cur = fw::selfish_revenue(a, g).revenue_share;
            CHECK(cur > prev);
            prev = cur;
        }
    }
}

TEST_CASE("profitability threshold by bisection") {
    CHECK(fw::profitability_threshold(0.0) == Catch::Approx(1.0 / 3.0).margin(1e-6));
    CHECK(fw::profitability_threshold(0.5) == Catch::Approx(0.25).margin(1e-6));
    CHECK(fw::profitability_threshold(1.0) == Catch::Approx(0.0).margin(1e-6));
    for (double g : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        double th = fw::profitability_threshold(g);
        CHECK(th == Catch::Approx((1 - g) / (3 - 2 * g)).margin(1e-6));
        // revenue margin really flips sign around the reported threshold
        if (th > 0.01) CHECK(fw::selfish_revenue(th * 0.9, g).rmg < 0.0);
        if (th < 0.49) CHECK(fw::selfish_revenue(std::min(0.49, th * 1.1 + 1e-4), g).rmg > 0.0);
    }
}

TEST_CASE("expansion orders") {
    fw::NetworkGraph star = make_star(12);
    std::vector<int> by_deg =
        fw::expansion_order(star, fw::ExpansionStrategy::descending_degree, 0);
    CHECK(by_deg[0] == 0);  // hub first
    for (std::size_t i = 1; i + 1 < by_deg.size(); ++i) CHECK(by_deg[i] < by_deg[i + 1]);

    fw::NetworkGraph g = fw::gen_exponential(100, 4.0, 17);
    std::vector<int> ord = fw::expansion_order(g, fw::ExpansionStrategy::descending_degree, 0);
    for (std::size_t i = 0; i + 1 < ord.size(); ++i) {
        CHECK(g.degree(ord[i]) >= g.degree(ord[i + 1]));
        if (g.degree(ord[i]) == g.degree(ord[i + 1])) CHECK(ord[i] < ord[i + 1]);
    }

    std::vector<int> asc = fw::expansion_order(g, fw::ExpansionStrategy::ascending_index, 0);
    for (int i = 0; i < 100; ++i) CHECK(asc[i] == i);

    std::vector<int> r1 = fw::expansion_order(g, fw::ExpansionStrategy::random_order, 5);
    std::vector<int> r2 = fw::expansion_order(g, fw::ExpansionStrategy::random_order, 5);
    std::vector<int> r3 = fw::expansion_order(g, fw::ExpansionStrategy::random_order, 6);
    CHECK(r1 == r2);
    CHECK(r1 != r3);
    std::vector<int> sorted = r1;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 100; ++i) CHECK(sorted[i] == i);

    CHECK(fw::expansion_member_count(0.02, 100) == 2);
    CHECK(fw::expansion_member_count(0.05, 100) == 5);
    CHECK(fw::expansion_member_count(0.001, 100) == 1);
    CHECK(fw::expansion_member_count(0.999, 100) == 99);
    CHECK(fw::expansion_member_count(0.13, 100) == 13);
}

TEST_CASE("analysis sweep on a mid-size regular instance") {
    fw::NetworkGraph g = fw::gen_regular(100, 4, 7);
    fw::MiningProfile mp = fw::MiningProfile::uniform(100, 0.01);
    std::vector<double> grid = {0.02, 0.05, 0.10, 0.20, 0.30, 0.40, 0.45};
    fw::SelfishCurve curve =
        fw::expansion_sweep(g, mp, fw::ExpansionStrategy::descending_degree, grid);

    REQUIRE(curve.points.size() == grid.size());
    double prev_alpha = 0.0, prev_gamma = -1.0;
    for (const fw::SelfishPoint& pt : curve.points) {
        CHECK(pt.alpha > prev_alpha);
        CHECK(pt.gamma >= prev_gamma);  // nested member sets only add paths
        CHECK(pt.gamma >= 0.0);
        CHECK(pt.gamma <= 1.0);
        CHECK(pt.revenue_share >= 0.0);
        CHECK(pt.revenue_share <= 1.0);
        prev_alpha = pt.alpha;
        prev_gamma = pt.gamma;
    }
    REQUIRE(curve.prth.has_value());
    REQUIRE(curve.at50.has_value());
    CHECK(curve.prth->x <= curve.at50->x);
    CHECK(curve.prth->x > 0.0);
    REQUIRE(curve.prth_grid.has_value());
    CHECK(std::abs(curve.prth->x - *curve.prth_grid) < 0.03);
}

TEST_CASE("analysis sweep bands on the large instances") {
    std::vector<double> grid = {0.02, 0.05, 0.10, 0.20, 0.30, 0.40, 0.45};

    fw::NetworkGraph ge = fw::gen_exponential(1000, 4.0, 5);
    fw::SelfishCurve ce = fw::expansion_sweep(ge, fw::MiningProfile::uniform(1000, 0.01),
                                              fw::ExpansionStrategy::descending_degree, grid);
    REQUIRE(ce.prth.has_value());
    CHECK(ce.prth->x > 0.025);
    CHECK(ce.prth->x < 0.12);
    REQUIRE(ce.at50.has_value());
    CHECK(ce.at50->x > 0.30);
    CHECK(ce.at50->x < 0.45);

    fw::NetworkGraph gr = fw::gen_regular(1000, 4, 5);
    fw::SelfishCurve cr = fw::expansion_sweep(gr, fw::MiningProfile::uniform(1000, 0.01),
                                              fw::ExpansionStrategy::descending_degree, grid);
    REQUIRE(cr.prth.has_value());
    CHECK(cr.prth->x > 0.07);
    CHECK(cr.prth->x < 0.17);
    REQUIRE(cr.at50.has_value());
    CHECK(cr.at50->x > 0.30);
    CHECK(cr.at50->x < 0.45);

    // the exponential family's hubs make early expansion more central
    CHECK(ce.prth->x < cr.prth->x);
}
