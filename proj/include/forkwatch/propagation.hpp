#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "forkwatch/graph.hpp"

namespace forkwatch {

// Per-node block production rates (probability of producing a block in one
// slot). The network total is kept <= 0.5 so the one-block-per-slot view of a
// slot stays a sane approximation of the underlying arrival process.
struct MiningProfile {
    std::vector<double> rates;
    double total = 0.0;

    MiningProfile() = default;

    explicit MiningProfile(std::vector<double> r) : rates(std::move(r)) {
        for (double x : rates) {
            if (!(x > 0.0)) throw std::invalid_argument("MiningProfile: rates must be positive");
            total += x;
        }
        if (rates.empty()) throw std::invalid_argument("MiningProfile: need at least one rate");
        if (total > 0.5 + 1e-12)
            throw std::invalid_argument("MiningProfile: total rate " + std::to_string(total) +
                                        " exceeds 0.5");
    }

    static MiningProfile uniform(int n, double pi_total) {
        if (n < 1) throw std::invalid_argument("MiningProfile::uniform: n must be >= 1");
        return MiningProfile(std::vector<double>(n, pi_total / n));
    }

    int size() const { return static_cast<int>(rates.size()); }

    bool is_uniform(double tol = 1e-12) const {
        for (double x : rates)
            if (std::abs(x - rates[0]) > tol) return false;
        return true;
    }

    double share(int i) const { return rates[i] / total; }
};

// All-pairs hop distances, flat row-major.
struct DistanceMatrix {
    int n = 0;
    std::vector<int> d;

    int at(int i, int j) const { return d[static_cast<std::size_t>(i) * n + j]; }
    const int* row(int i) const { return d.data() + static_cast<std::size_t>(i) * n; }

    int eccentricity(int i) const {
        const int* r = row(i);
        return *std::max_element(r, r + n);
    }
};

// BFS from every source; requires a connected graph.
inline DistanceMatrix all_pairs_hop_distance(const NetworkGraph& g) {
    DistanceMatrix dm;
    dm.n = g.n;
    dm.d.assign(static_cast<std::size_t>(g.n) * g.n, -1);
    std::vector<int> queue(g.n);
    for (int s = 0; s < g.n; ++s) {
        int* dist = dm.d.data() + static_cast<std::size_t>(s) * g.n;
        dist[s] = 0;
        int head = 0, tail = 0;
        queue[tail++] = s;
        while (head < tail) {
            int u = queue[head++];
            for (int v : g.adj[u])
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    queue[tail++] = v;
                }
        }
        if (tail != g.n) {
            int miss = 0;
            while (dist[miss] >= 0) ++miss;
            throw std::invalid_argument("all_pairs_hop_distance: node " + std::to_string(miss) +
                                        " unreachable from node " + std::to_string(s));
        }
    }
    return dm;
}

// How much block production sits at nodes still unaware of a block born at
// `origin`, s slots after its birth. Slot s counts nodes at hop distance > s,
// i.e. the set is measured after the slot's hop has been delivered.
struct PropagationProfile {
    int origin = -1;
    int eccentricity = 0;
    std::vector<double> uninformed_rate;  // index s = 0..eccentricity; last entry is 0
};

inline PropagationProfile uninformed_profile(const DistanceMatrix& dm, const MiningProfile& mp,
                                             int origin) {
    if (mp.size() != dm.n) throw std::invalid_argument("uninformed_profile: profile/graph size mismatch");
    if (origin < 0 || origin >= dm.n) throw std::invalid_argument("uninformed_profile: origin out of range");
    PropagationProfile pp;
    pp.origin = origin;
    pp.eccentricity = dm.eccentricity(origin);
    // rate mass per distance level, then suffix sums
    std::vector<double> level(pp.eccentricity + 1, 0.0);
    const int* dist = dm.row(origin);
    for (int k = 0; k < dm.n; ++k) level[dist[k]] += mp.rates[k];
    pp.uninformed_rate.assign(pp.eccentricity + 1, 0.0);
    double suffix = 0.0;
    for (int s = pp.eccentricity; s >= 0; --s) {
        pp.uninformed_rate[s] = suffix;  // nodes strictly farther than s
        suffix += level[s];
    }
    return pp;
}

// Remaining hops until a block born at i (t slots ago) reaches k. Negative
// once it has already arrived; used to compare propagation head starts.
inline int tau(const DistanceMatrix& dm, int i, int k, int t) {
    if (i < 0 || i >= dm.n || k < 0 || k >= dm.n) throw std::invalid_argument("tau: node out of range");
    if (t < 0) throw std::invalid_argument("tau: t must be >= 0");
    return dm.at(i, k) - t;
}

}  // namespace forkwatch
