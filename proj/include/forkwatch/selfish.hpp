#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "forkwatch/graph.hpp"
#include "forkwatch/metrics.hpp"
#include "forkwatch/propagation.hpp"

namespace forkwatch {

struct SelfishConfig {
    std::vector<int> members;
    double alpha = 0.0;  // pool's share of total block production
    double beta = 0.0;   // honest remainder, kept as 1 - alpha

    static SelfishConfig from_members(const MiningProfile& mp, std::vector<int> members) {
        if (members.empty()) throw std::invalid_argument("SelfishConfig: members must be non-empty");
        SelfishConfig sc;
        sc.members = std::move(members);
        std::sort(sc.members.begin(), sc.members.end());
        for (std::size_t i = 0; i < sc.members.size(); ++i) {
            int m = sc.members[i];
            if (m < 0 || m >= mp.size()) throw std::invalid_argument("SelfishConfig: member id out of range");
            if (i > 0 && sc.members[i] == sc.members[i - 1])
                throw std::invalid_argument("SelfishConfig: duplicate member id");
            sc.alpha += mp.share(m);
        }
        if (sc.alpha > 0.5 + 1e-12)
            throw std::invalid_argument("SelfishConfig: pool power " + std::to_string(sc.alpha) +
                                        " exceeds 0.5");
        sc.beta = 1.0 - sc.alpha;
        return sc;
    }
};

namespace detail {

struct BfsPaths {
    std::vector<int> dist;
    std::vector<double> sigma;   // shortest-path counts (double: ratios are what matter)
    std::vector<int> pop_order;  // nodes in non-decreasing distance order
};

inline BfsPaths bfs_paths(const NetworkGraph& g, int s) {
    BfsPaths r;
    r.dist.assign(g.n, -1);
    r.sigma.assign(g.n, 0.0);
    r.pop_order.reserve(g.n);
    r.dist[s] = 0;
    r.sigma[s] = 1.0;
    std::vector<int> queue{s};
    queue.reserve(g.n);
    std::size_t head = 0;
    while (head < queue.size()) {
        int u = queue[head++];
        r.pop_order.push_back(u);
        for (int w : g.adj[u]) {
            if (r.dist[w] < 0) {
                r.dist[w] = r.dist[u] + 1;
                queue.push_back(w);
            }
            if (r.dist[w] == r.dist[u] + 1) r.sigma[w] += r.sigma[u];
        }
    }
    return r;
}

// Standard dependency accumulation; valid only when every ordered honest pair
// carries the same weight 1/(M(M-1)).
inline double betweenness_uniform(const NetworkGraph& g, int v) {
    int M = g.n - 1;
    double acc = 0.0;
    for (int s = 0; s < g.n; ++s) {
        if (s == v) continue;
        BfsPaths bp = bfs_paths(g, s);
        if (static_cast<int>(bp.pop_order.size()) != g.n)
            throw std::invalid_argument("weighted_betweenness: graph is not connected");
        std::vector<double> delta(g.n, 0.0);
        for (std::size_t idx = bp.pop_order.size(); idx-- > 0;) {
            int w = bp.pop_order[idx];
            for (int u : g.adj[w])
                if (bp.dist[u] == bp.dist[w] - 1)
                    delta[u] += bp.sigma[u] / bp.sigma[w] * (1.0 + delta[w]);
        }
        acc += delta[v];
    }
    return acc / (static_cast<double>(M) * (M - 1));
}

}  // namespace detail

// Mining-power-weighted interior betweenness of node v: over ordered honest
// pairs (i, j), the fraction of i->j shortest paths passing through v,
// weighted by i's share of honest power and j's share of the remainder.
// Collapses to normalized betweenness centrality when honest rates are equal.
inline double weighted_betweenness(const NetworkGraph& g, const MiningProfile& mp, int v) {
    if (mp.size() != g.n) throw std::invalid_argument("weighted_betweenness: profile/graph size mismatch");
    if (v < 0 || v >= g.n) throw std::invalid_argument("weighted_betweenness: v out of range");
    if (g.n < 3) return 0.0;

    bool honest_uniform = true;
    double first = -1.0;
    for (int i = 0; i < g.n; ++i) {
        if (i == v) continue;
        if (first < 0) first = mp.rates[i];
        else if (std::abs(mp.rates[i] - first) > 1e-12) { honest_uniform = false; break; }
    }
    if (honest_uniform) return detail::betweenness_uniform(g, v);

    double honest_total = mp.total - mp.rates[v];
    detail::BfsPaths from_v = detail::bfs_paths(g, v);
    if (static_cast<int>(from_v.pop_order.size()) != g.n)
        throw std::invalid_argument("weighted_betweenness: graph is not connected");

    double gamma = 0.0;
    for (int i = 0; i < g.n; ++i) {
        if (i == v) continue;
        detail::BfsPaths from_i = detail::bfs_paths(g, i);
        double inner_total = honest_total - mp.rates[i];
        if (!(inner_total > 0.0)) continue;
        double acc = 0.0;
        for (int j = 0; j < g.n; ++j) {
            if (j == v || j == i) continue;
            if (from_i.dist[v] + from_v.dist[j] != from_i.dist[j]) continue;
            double ratio = from_i.sigma[v] * from_v.sigma[j] / from_i.sigma[j];
            acc += mp.rates[j] / inner_total * ratio;
        }
        gamma += mp.rates[i] / honest_total * acc;
    }
    return gamma;
}

// Communication advantage of a pool: contract its members to one super node
// and take that node's weighted betweenness against the honest remainder.
inline double gamma_sm(const NetworkGraph& g, const MiningProfile& mp, const std::vector<int>& members) {
    if (mp.size() != g.n) throw std::invalid_argument("gamma_sm: profile/graph size mismatch");
    ContractResult cr = contract_pool(g, members);
    std::vector<double> rates(cr.pool_index + 1, 0.0);
    for (int v = 0; v < g.n; ++v) rates[cr.mapping[v]] += mp.rates[v];
    MiningProfile cmp(std::move(rates));
    return weighted_betweenness(cr.graph, cmp, cr.pool_index);
}

struct SelfishRevenue {
    double revenue_share = 0.0;  // pool's fraction of canonized blocks
    double rmg = 0.0;            // (revenue_share - alpha) / alpha
};

// Long-run revenue of a withholding pool with power alpha and race-winning
// weight gamma. The pool's private lead follows a birth-death chain (states
// 0, 0', 1, 2, ...); we solve the stationary distribution numerically with a
// reflecting truncation far in the tail and accumulate per-state revenue:
//   0' + pool block   -> pool publishes both, +2 pool
//   0' + honest-on-pool (weight gamma)   -> +1 pool, +1 honest
//   0' + honest-on-honest                -> +2 honest
//   0  + honest block -> +1 honest
//   2  + honest block -> pool overrides with its pair, +2 pool
//   n>2 + honest block -> oldest private block is safe, +1 pool
inline SelfishRevenue selfish_revenue(double alpha, double gamma) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw std::invalid_argument("selfish_revenue: alpha must be in (0,1)");
    if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("selfish_revenue: gamma must be in [0,1]");
    SelfishRevenue out;
    if (alpha >= 0.5) {
        // lead random walk is non-returning: the pool eventually orphans
        // every honest block
        out.revenue_share = 1.0;
        out.rmg = (1.0 - alpha) / alpha;
        return out;
    }
    double beta = 1.0 - alpha;
    double r = alpha / beta;  // tail decay of the lead chain

    // unnormalized stationary masses
    double p0 = 1.0;
    double p1 = alpha * p0;
    double p0p = beta * p1;
    double p2 = (alpha / beta) * p1;

    // Normalization cancels in the revenue ratio, so unnormalized masses are
    // accumulated directly into the two per-event revenue rates.
    double pool = p0p * alpha * 2.0 + p0p * gamma * beta * 1.0;
    double honest = p0p * gamma * beta * 1.0 + p0p * (1.0 - gamma) * beta * 2.0 + p0 * beta * 1.0;

    // Masses decay geometrically above lead 2 (p_n = p2 * r^(n-2)), so the
    // infinite tail sums exactly: sum_{n>=2} p_n = p2 / (1 - r). Each of those
    // states pays the pool one block per honest find, plus one extra at n=2
    // where the pool releases its whole two-block lead.
    pool += beta * (p2 / (1.0 - r) + p2);

    out.revenue_share = pool / (pool + honest);
    out.rmg = (out.revenue_share - alpha) / alpha;
    return out;
}

// Smallest pool power at which withholding beats honest mining, located by
// bisecting the revenue margin over (0, 0.5).
inline double profitability_threshold(double gamma) {
    if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("profitability_threshold: gamma must be in [0,1]");
    auto margin = [&](double a) { return selfish_revenue(a, gamma).revenue_share - a; };
    double lo = 1e-9, hi = 0.5 - 1e-9;
    if (margin(lo) > 0.0) return 0.0;  // profitable from arbitrarily small power
    if (margin(hi) <= 0.0) return 0.5;
    for (int it = 0; it < 200 && (hi - lo) > 1e-10; ++it) {
        double mid = 0.5 * (lo + hi);
        if (margin(mid) > 0.0) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

enum class ExpansionStrategy { descending_degree, ascending_index, random_order };

inline std::string to_string(ExpansionStrategy s) {
    switch (s) {
        case ExpansionStrategy::descending_degree: return "descending_degree";
        case ExpansionStrategy::ascending_index: return "ascending_index";
        case ExpansionStrategy::random_order: return "random";
    }
    return "?";
}

// Order in which nodes join the pool as it grows.
inline std::vector<int> expansion_order(const NetworkGraph& g, ExpansionStrategy strategy,
                                        std::uint64_t seed = 0) {
    std::vector<int> order(g.n);
    for (int i = 0; i < g.n; ++i) order[i] = i;
    switch (strategy) {
        case ExpansionStrategy::ascending_index:
            break;
        case ExpansionStrategy::descending_degree:
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                if (g.degree(a) != g.degree(b)) return g.degree(a) > g.degree(b);
                return a < b;
            });
            break;
        case ExpansionStrategy::random_order: {
            Rng rng(seed);
            rng.shuffle(order);
            break;
        }
    }
    return order;
}

// ceil(alpha*n) with a guard against binary-fraction artifacts
// (0.02*100 == 2.0000000000000004 must still mean 2 members).
inline int expansion_member_count(double alpha, int n) {
    int k = static_cast<int>(std::ceil(alpha * n - 1e-9));
    return std::clamp(k, 1, n - 1);
}

struct SelfishPoint {
    double alpha = 0.0;  // realized pool power share
    double gamma = 0.0;
    double revenue_share = 0.0;
    double rmg = 0.0;
    int members = 0;
};

struct SelfishCurve {
    ExpansionStrategy strategy = ExpansionStrategy::descending_degree;
    std::vector<SelfishPoint> points;
    PolyFit rmg_fit;
    PolyFit revenue_fit;
    std::optional<Crossing> prth;  // first alpha with positive revenue margin
    std::optional<Crossing> at50;  // first alpha with majority revenue
    // the same crossings read straight off the grid points, no fit involved
    std::optional<double> prth_grid;
    std::optional<double> at50_grid;
};

// Grow the pool along the strategy order through the alpha grid, computing
// the communication advantage and model revenue at each size.
inline SelfishCurve expansion_sweep(const NetworkGraph& g, const MiningProfile& mp,
                                    ExpansionStrategy strategy, const std::vector<double>& alpha_grid,
                                    std::uint64_t order_seed = 0) {
    if (mp.size() != g.n) throw std::invalid_argument("expansion_sweep: profile/graph size mismatch");
    if (alpha_grid.empty()) throw std::invalid_argument("expansion_sweep: alpha grid must be non-empty");
    std::vector<double> grid(alpha_grid);
    std::sort(grid.begin(), grid.end());
    for (double a : alpha_grid)
        if (!(a > 0.0) || a > 0.5)
            throw std::invalid_argument("expansion_sweep: alpha " + std::to_string(a) +
                                        " outside (0, 0.5]");

    std::vector<int> order = expansion_order(g, strategy, order_seed);
    SelfishCurve curve;
    curve.strategy = strategy;
    int last_k = -1;
    for (double a : grid) {
        int k = expansion_member_count(a, g.n);
        if (k == last_k) continue;  // same realized pool; an extra point adds nothing
        last_k = k;
        std::vector<int> members(order.begin(), order.begin() + k);
        SelfishPoint pt;
        pt.members = k;
        for (int m : members) pt.alpha += mp.share(m);
        if (pt.alpha > 0.5 + 1e-12)
            throw std::invalid_argument("expansion_sweep: realized pool power " +
                                        std::to_string(pt.alpha) + " exceeds 0.5 at grid alpha " +
                                        std::to_string(a));
        try {
            pt.gamma = gamma_sm(g, mp, members);
        } catch (const std::exception& e) {
            throw std::runtime_error("expansion_sweep: at alpha " + std::to_string(a) + ": " + e.what());
        }
        SelfishRevenue rev = selfish_revenue(pt.alpha, pt.gamma);
        pt.revenue_share = rev.revenue_share;
        pt.rmg = rev.rmg;
        curve.points.push_back(pt);
    }

    if (curve.points.size() >= 2) {
        std::vector<double> xs, rmgs, shares;
        for (const auto& p : curve.points) {
            xs.push_back(p.alpha);
            rmgs.push_back(p.rmg);
            shares.push_back(p.revenue_share);
        }
        curve.rmg_fit = fit_poly(xs, rmgs, 7);
        curve.revenue_fit = fit_poly(xs, shares, 7);
        curve.prth = threshold_crossing(curve.rmg_fit, xs, rmgs, 0.0);
        curve.at50 = threshold_crossing(curve.revenue_fit, xs, shares, 0.5);
        curve.prth_grid = linear_crossing(xs, rmgs, 0.0);
        curve.at50_grid = linear_crossing(xs, shares, 0.5);
    }
    return curve;
}

}  // namespace forkwatch
