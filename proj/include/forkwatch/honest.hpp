#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "forkwatch/propagation.hpp"

namespace forkwatch {

// Probability that a block born at pp.origin has seen no competitor by t
// slots after birth: product over s = 1..t of (1 - uninformed rate at s).
// Saturates at the origin's eccentricity, so a large t yields the limit.
inline double p_no_compete(const PropagationProfile& pp, int t) {
    if (t < 0) throw std::invalid_argument("p_no_compete: t must be >= 0");
    double prod = 1.0;
    int stop = std::min(t, pp.eccentricity);
    for (int s = 1; s <= stop; ++s) {
        double f = 1.0 - pp.uninformed_rate[s];
        if (f < 0.0) throw std::invalid_argument("p_no_compete: uninformed rate exceeds 1");
        prod *= f;
    }
    return prod;
}

inline double p_no_compete_limit(const PropagationProfile& pp) {
    return p_no_compete(pp, pp.eccentricity);
}

// Network fork rate: chance that the next block's propagation overlaps a
// competing block, averaged over who mines it.
inline double fork_rate(const DistanceMatrix& dm, const MiningProfile& mp) {
    if (mp.size() != dm.n) throw std::invalid_argument("fork_rate: profile/graph size mismatch");
    double fr = 0.0;
    for (int o = 0; o < dm.n; ++o) {
        PropagationProfile pp = uninformed_profile(dm, mp, o);
        fr += mp.share(o) * (1.0 - p_no_compete_limit(pp));
    }
    return fr;
}

inline double fork_rate(const NetworkGraph& g, const MiningProfile& mp) {
    return fork_rate(all_pairs_hop_distance(g), mp);
}

// Closed-form shortcut 1 - (1-pi)^I for uniform rates, where I sums the
// node-averaged uninformed fraction over the same slots the exact product
// runs over (s >= 1). Meaningful for uniform profiles; callers should warn
// when handing in skewed rates (see MiningProfile::is_uniform).
inline double fork_rate_uniform_approx(const DistanceMatrix& dm, const MiningProfile& mp) {
    if (mp.size() != dm.n) throw std::invalid_argument("fork_rate_uniform_approx: size mismatch");
    double sum = 0.0;  // sum over ordered pairs of max(0, dist-1)
    for (int o = 0; o < dm.n; ++o) {
        const int* dist = dm.row(o);
        for (int k = 0; k < dm.n; ++k)
            if (dist[k] > 1) sum += dist[k] - 1;
    }
    double I = sum / (static_cast<double>(dm.n) * dm.n);
    return 1.0 - std::pow(1.0 - mp.total, I);
}

inline double fork_rate_uniform_approx(const NetworkGraph& g, const MiningProfile& mp) {
    return fork_rate_uniform_approx(all_pairs_hop_distance(g), mp);
}

namespace detail {

// Power-weighted share of the network that hears i's block (published t slots
// ago) strictly before j's fresh competitor, ties counting half. Both blocks
// flood at one hop per slot, so node m compares dist(i,m)-t against dist(j,m).
inline double omega_core(const int* di, const int* dj, int t, const MiningProfile& mp) {
    double acc = 0.0;
    const auto& r = mp.rates;
    int n = mp.size();
    for (int m = 0; m < n; ++m) {
        int a = di[m] - t;
        int b = dj[m];
        if (a < b) acc += r[m];
        else if (a == b) acc += 0.5 * r[m];
    }
    return acc / mp.total;
}

}  // namespace detail

// Probability that i's block, already t slots into its propagation, ends up
// canonized when j publishes a competitor now. Defined for 0 <= t <
// dist(i,j): at larger t node j would already know i's block.
inline double omega_hat(const DistanceMatrix& dm, const MiningProfile& mp, int i, int j, int t) {
    if (mp.size() != dm.n) throw std::invalid_argument("omega_hat: profile/graph size mismatch");
    if (i < 0 || i >= dm.n || j < 0 || j >= dm.n) throw std::invalid_argument("omega_hat: node out of range");
    if (i == j) throw std::invalid_argument("omega_hat: i and j must differ");
    if (t < 0 || t >= dm.at(i, j))
        throw std::invalid_argument("omega_hat: need 0 <= t < dist(i,j)");
    return detail::omega_core(dm.row(i), dm.row(j), t, mp);
}

// Per-node probability of owning the next canonized block, accounting for
// fork races won and lost. For each origin o and each slot t of its block's
// propagation, every still-uninformed node k may publish a competitor with
// rate pi_k; the race splits the win between o and k by the omega weight.
inline std::vector<double> expected_win(const DistanceMatrix& dm, const MiningProfile& mp) {
    if (mp.size() != dm.n) throw std::invalid_argument("expected_win: profile/graph size mismatch");
    int n = dm.n;
    std::vector<double> ew(n, 0.0);
    std::vector<std::vector<int>> at_dist;  // nodes bucketed by distance from the current origin
    for (int o = 0; o < n; ++o) {
        PropagationProfile pp = uninformed_profile(dm, mp, o);
        int ecc = pp.eccentricity;
        const int* dist = dm.row(o);

        // prefix products of (1 - uninformed rate)
        std::vector<double> pnc(ecc + 1, 1.0);
        for (int s = 1; s <= ecc; ++s) pnc[s] = pnc[s - 1] * (1.0 - pp.uninformed_rate[s]);

        double so = mp.share(o);
        ew[o] += so * pnc[ecc];

        at_dist.assign(ecc + 1, {});
        for (int k = 0; k < n; ++k) at_dist[dist[k]].push_back(k);

        for (int t = 1; t < ecc; ++t) {
            double pt = so * pnc[t];
            for (int d = t + 1; d <= ecc; ++d) {
                for (int k : at_dist[d]) {
                    double w = detail::omega_core(dist, dm.row(k), t, mp);
                    double mass = pt * mp.rates[k];
                    ew[o] += mass * w;
                    ew[k] += mass * (1.0 - w);
                }
            }
        }
    }
    return ew;
}

// Smallest computing-power share whose combined revenue exceeds half the
// total: sort nodes by revenue (ties by index), take the shortest prefix with
// more than 50% of the normalized revenue, return its power share.
inline double at50_from_mr(const std::vector<double>& mr, const std::vector<double>& power_share) {
    if (mr.empty() || mr.size() != power_share.size())
        throw std::invalid_argument("at50_from_mr: need equal-size non-empty vectors");
    double total = std::accumulate(mr.begin(), mr.end(), 0.0);
    if (!(total > 0.0)) throw std::invalid_argument("at50_from_mr: revenue sum must be positive");
    std::vector<int> idx(mr.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (mr[a] != mr[b]) return mr[a] > mr[b];
        return a < b;
    });
    double rev = 0.0, pow_acc = 0.0;
    for (int i : idx) {
        rev += mr[i] / total;
        pow_acc += power_share[i];
        // strict majority; the epsilon keeps summation error from letting an
        // exact half (e.g. 500 of 1000 uniform nodes) count as one
        if (rev > 0.5 + 1e-9) return pow_acc;
    }
    return pow_acc;  // unreachable for positive totals; defensive
}

struct HonestAnalysisReport {
    int n = 0;
    double fork_rate = 0.0;
    double at50 = 0.0;
    std::vector<double> expected_win;   // E[W_i]; doubles as the MR estimate
    std::vector<double> rmg;            // (E[W_i] - share_i) / share_i
    std::vector<double> p_nc_limit;     // per-origin no-competition limit
};

inline HonestAnalysisReport analyze_honest(const NetworkGraph& g, const MiningProfile& mp) {
    DistanceMatrix dm = all_pairs_hop_distance(g);
    HonestAnalysisReport rep;
    rep.n = g.n;
    rep.expected_win = expected_win(dm, mp);
    rep.p_nc_limit.resize(g.n);
    double fr = 0.0;
    for (int o = 0; o < g.n; ++o) {
        rep.p_nc_limit[o] = p_no_compete_limit(uninformed_profile(dm, mp, o));
        fr += mp.share(o) * (1.0 - rep.p_nc_limit[o]);
    }
    rep.fork_rate = fr;
    rep.rmg.resize(g.n);
    std::vector<double> shares(g.n);
    for (int i = 0; i < g.n; ++i) {
        shares[i] = mp.share(i);
        rep.rmg[i] = (rep.expected_win[i] - shares[i]) / shares[i];
    }
    rep.at50 = at50_from_mr(rep.expected_win, shares);
    return rep;
}

}  // namespace forkwatch
