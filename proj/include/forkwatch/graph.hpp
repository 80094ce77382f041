#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "forkwatch/rng.hpp"

namespace forkwatch {

// Recipe a generated topology came from; echoed into serialized outputs so a
// run can be reproduced from its artifacts alone.
struct GraphSpec {
    std::string family;  // "regular" | "regular_clustered" | "exponential"
    int n = 0;
    double d = 0.0;          // degree (regular) or mean degree (exponential)
    int cluster_pct = 0;     // clique size as a percentage of n (regular_clustered)
    std::uint64_t seed = 0;
};

// Undirected simple graph, adjacency lists kept sorted.
struct NetworkGraph {
    int n = 0;
    std::vector<std::vector<int>> adj;
    std::vector<std::string> labels;  // optional; empty or size n
    std::optional<GraphSpec> spec;

    int degree(int v) const { return static_cast<int>(adj[v].size()); }

    std::size_t edge_count() const {
        std::size_t s = 0;
        for (const auto& a : adj) s += a.size();
        return s / 2;
    }

    bool has_edge(int u, int v) const {
        return std::binary_search(adj[u].begin(), adj[u].end(), v);
    }

    // Canonical edge list: u < v, lexicographic. The serialized form sorts so
    // that identical graphs always produce identical bytes.
    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> es;
        es.reserve(edge_count());
        for (int u = 0; u < n; ++u)
            for (int v : adj[u])
                if (u < v) es.emplace_back(u, v);
        std::sort(es.begin(), es.end());
        return es;
    }
};

namespace detail {

inline NetworkGraph graph_from_edge_set(int n, const std::set<std::pair<int, int>>& es) {
    NetworkGraph g;
    g.n = n;
    g.adj.assign(n, {});
    for (auto [u, v] : es) {
        g.adj[u].push_back(v);
        g.adj[v].push_back(u);
    }
    for (auto& a : g.adj) std::sort(a.begin(), a.end());
    return g;
}

inline std::vector<int> component_ids(const NetworkGraph& g) {
    std::vector<int> comp(g.n, -1);
    std::vector<int> stack;
    int c = 0;
    for (int s = 0; s < g.n; ++s) {
        if (comp[s] != -1) continue;
        comp[s] = c;
        stack.push_back(s);
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v : g.adj[u])
                if (comp[v] == -1) {
                    comp[v] = c;
                    stack.push_back(v);
                }
        }
        ++c;
    }
    return comp;
}

}  // namespace detail

inline bool is_connected(const NetworkGraph& g) {
    if (g.n <= 1) return true;
    auto comp = detail::component_ids(g);
    return *std::max_element(comp.begin(), comp.end()) == 0;
}

// Structural checks; returns human-readable violations (empty == valid).
inline std::vector<std::string> validate(const NetworkGraph& g) {
    std::vector<std::string> out;
    if (g.n < 1) out.push_back("node count must be >= 1");
    if (static_cast<int>(g.adj.size()) != g.n) out.push_back("adjacency size differs from node count");
    if (!g.labels.empty() && static_cast<int>(g.labels.size()) != g.n)
        out.push_back("label list size differs from node count");
    for (int u = 0; u < static_cast<int>(g.adj.size()); ++u) {
        const auto& a = g.adj[u];
        if (!std::is_sorted(a.begin(), a.end())) out.push_back("adjacency of node " + std::to_string(u) + " not sorted");
        for (std::size_t k = 0; k < a.size(); ++k) {
            int v = a[k];
            if (v < 0 || v >= g.n) {
                out.push_back("edge endpoint out of range at node " + std::to_string(u));
                continue;
            }
            if (v == u) out.push_back("self-loop at node " + std::to_string(u));
            if (k > 0 && a[k] == a[k - 1]) out.push_back("duplicate edge " + std::to_string(u) + "-" + std::to_string(v));
            if (!std::binary_search(g.adj[v].begin(), g.adj[v].end(), u))
                out.push_back("asymmetric edge " + std::to_string(u) + "-" + std::to_string(v));
        }
    }
    if (out.empty() && !is_connected(g)) out.push_back("graph is not connected");
    return out;
}

// Random d-regular graph via the pairing (configuration) model: d stubs per
// node, shuffled and paired; a pairing with self-loops or parallel edges, or
// a disconnected result, is rejected and redrawn.
inline NetworkGraph gen_regular(int n, int d, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_regular: n must be >= 1");
    if (d < 0 || d >= n) {
        if (!(n == 1 && d == 0))
            throw std::invalid_argument("gen_regular: need 0 <= d < n (got n=" + std::to_string(n) +
                                        ", d=" + std::to_string(d) + ")");
    }
    if ((static_cast<long long>(n) * d) % 2 != 0)
        throw std::invalid_argument("gen_regular: n*d must be even (got n=" + std::to_string(n) +
                                    ", d=" + std::to_string(d) + ")");
    if (n == 1) {
        NetworkGraph g;
        g.n = 1;
        g.adj.assign(1, {});
        g.spec = GraphSpec{"regular", n, static_cast<double>(d), 0, seed};
        return g;
    }
    if (d == 0) throw std::invalid_argument("gen_regular: d=0 cannot be connected for n > 1");

    Rng rng(seed);
    constexpr int kMaxAttempts = 1000;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        // Pairing model with per-pair rejection: draw two free stubs, re-draw
        // when they'd form a self-loop or duplicate edge. Rejecting the whole
        // pairing instead would almost never terminate beyond d ~ 6 (the
        // acceptance probability decays like exp(-(d^2-1)/4)).
        std::vector<int> stubs;
        stubs.reserve(static_cast<std::size_t>(n) * d);
        for (int v = 0; v < n; ++v)
            for (int k = 0; k < d; ++k) stubs.push_back(v);

        std::set<std::pair<int, int>> es;
        bool dead = false;
        while (!stubs.empty()) {
            bool placed = false;
            for (int tries = 0; tries < 64 && !placed; ++tries) {
                std::size_t a = rng.below(stubs.size());
                std::size_t b = rng.below(stubs.size());
                if (a == b) continue;
                int u = stubs[a], v = stubs[b];
                if (u == v) continue;
                auto e = std::minmax(u, v);
                if (!es.insert({e.first, e.second}).second) continue;
                if (a < b) std::swap(a, b);
                stubs[a] = stubs.back();
                stubs.pop_back();
                stubs[b] = stubs.back();
                stubs.pop_back();
                placed = true;
            }
            if (!placed) {  // only illegal pairs left (or vanishingly unlucky)
                dead = true;
                break;
            }
        }
        if (dead) continue;
        NetworkGraph g = detail::graph_from_edge_set(n, es);
        if (!is_connected(g)) continue;
        g.spec = GraphSpec{"regular", n, static_cast<double>(d), 0, seed};
        return g;
    }
    throw std::runtime_error("gen_regular: no simple connected pairing found in " +
                             std::to_string(kMaxAttempts) + " attempts for n=" + std::to_string(n) +
                             ", d=" + std::to_string(d));
}

// Regular topology with a planted well-connected cluster: all missing edges
// among the first floor(n*pct/100) nodes are added on top of gen_regular.
inline NetworkGraph gen_regular_clustered(int n, int d, int cluster_pct, std::uint64_t seed) {
    if (cluster_pct < 0 || cluster_pct > 100)
        throw std::invalid_argument("gen_regular_clustered: cluster_pct must be in [0,100]");
    NetworkGraph g = gen_regular(n, d, seed);
    int k = static_cast<int>((static_cast<long long>(n) * cluster_pct) / 100);
    std::vector<std::pair<int, int>> base = g.edges();
    std::set<std::pair<int, int>> es(base.begin(), base.end());
    for (int u = 0; u < k; ++u)
        for (int v = u + 1; v < k; ++v) es.insert({u, v});
    NetworkGraph out = detail::graph_from_edge_set(n, es);
    out.spec = GraphSpec{"regular_clustered", n, static_cast<double>(d), cluster_pct, seed};
    return out;
}

// Heterogeneous topology: exponentially distributed target degrees (mean
// d_mean, floor 2, cap n-1), wired by the configuration model with self-loops
// and parallel edges dropped, then spliced into one component if needed.
inline NetworkGraph gen_exponential(int n, double d_mean, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("gen_exponential: n must be >= 2");
    if (!(d_mean > 0.0)) throw std::invalid_argument("gen_exponential: d_mean must be positive");
    Rng rng(seed);

    std::vector<int> deg(n);
    long long total = 0;
    for (int v = 0; v < n; ++v) {
        long long want = std::llround(rng.exponential(d_mean));
        want = std::max<long long>(2, std::min<long long>(want, n - 1));
        deg[v] = static_cast<int>(want);
        total += want;
    }
    if (total % 2 != 0) {  // stub count must be even; bump one node that has room
        for (int tries = 0; tries < n * 4; ++tries) {
            int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
            if (deg[j] < n - 1) { ++deg[j]; break; }
        }
    }

    std::vector<int> stubs;
    stubs.reserve(static_cast<std::size_t>(total + 1));
    for (int v = 0; v < n; ++v)
        for (int k = 0; k < deg[v]; ++k) stubs.push_back(v);
    if (stubs.size() % 2 != 0) stubs.pop_back();
    rng.shuffle(stubs);

    std::set<std::pair<int, int>> es;
    for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
        int u = stubs[i], v = stubs[i + 1];
        if (u == v) continue;  // dropped, not redrawn
        auto e = std::minmax(u, v);
        es.insert({e.first, e.second});
    }

    NetworkGraph g = detail::graph_from_edge_set(n, es);

    // Connectivity repair: splice every smaller component into the largest one
    // with a degree-preserving double rewire where possible.
    constexpr int kMaxRepairs = 4096;
    int repairs = 0;
    while (!is_connected(g)) {
        if (++repairs > kMaxRepairs)
            throw std::runtime_error("gen_exponential: connectivity repair exceeded " +
                                     std::to_string(kMaxRepairs) + " rewires (n=" + std::to_string(n) + ")");
        auto comp = detail::component_ids(g);
        int ncomp = *std::max_element(comp.begin(), comp.end()) + 1;
        std::vector<int> size(ncomp, 0);
        for (int c : comp) ++size[c];
        int big = static_cast<int>(std::max_element(size.begin(), size.end()) - size.begin());

        // target: any node of a smaller component (lowest id keeps this deterministic)
        int target = -1;
        for (int v = 0; v < g.n; ++v)
            if (comp[v] != big) { target = v; break; }

        std::vector<std::pair<int, int>> big_edges;
        for (auto& e : g.edges())
            if (comp[e.first] == big) big_edges.push_back(e);
        if (big_edges.empty())
            throw std::runtime_error("gen_exponential: largest component has no edges to rewire");
        auto [u, v] = big_edges[rng.below(big_edges.size())];

        es.erase({u, v});
        // Prefer a degree-preserving splice through an edge of the small component.
        std::vector<std::pair<int, int>> small_edges;
        for (auto& e : g.edges())
            if (comp[e.first] == comp[target]) small_edges.push_back(e);
        bool done = false;
        if (!small_edges.empty()) {
            auto [a, b] = small_edges[rng.below(small_edges.size())];
            if (u != a && v != b && !es.count(std::minmax(u, a)) && !es.count(std::minmax(v, b))) {
                es.erase({a, b});
                es.insert(std::minmax(u, a));
                es.insert(std::minmax(v, b));
                done = true;
            }
        }
        if (!done) {  // fall back: hook both freed stubs to the target node
            if (u != target && v != target && !es.count(std::minmax(u, target)) &&
                !es.count(std::minmax(v, target))) {
                es.insert(std::minmax(u, target));
                es.insert(std::minmax(v, target));
            } else {
                es.insert({u, v});  // undo, try another random edge next round
            }
        }
        g = detail::graph_from_edge_set(n, es);
    }
    g.spec = GraphSpec{"exponential", n, d_mean, 0, seed};
    return g;
}

struct ContractResult {
    NetworkGraph graph;
    std::vector<int> mapping;  // old node id -> new node id
    int pool_index = -1;
};

// Merge `members` into one super node (placed last); honest nodes keep their
// relative order. Edges internal to the pool vanish; multiple member links to
// the same outside node collapse to one.
inline ContractResult contract_pool(const NetworkGraph& g, const std::vector<int>& members) {
    if (members.empty()) throw std::invalid_argument("contract_pool: members must be non-empty");
    std::vector<char> in_pool(g.n, 0);
    for (int m : members) {
        if (m < 0 || m >= g.n) throw std::invalid_argument("contract_pool: member id out of range");
        if (in_pool[m]) throw std::invalid_argument("contract_pool: duplicate member id " + std::to_string(m));
        in_pool[m] = 1;
    }
    int n_pool = static_cast<int>(members.size());
    if (n_pool == g.n) throw std::invalid_argument("contract_pool: members cover the whole graph");

    ContractResult res;
    res.mapping.assign(g.n, -1);
    int next = 0;
    for (int v = 0; v < g.n; ++v)
        if (!in_pool[v]) res.mapping[v] = next++;
    res.pool_index = next;  // == g.n - n_pool
    for (int v = 0; v < g.n; ++v)
        if (in_pool[v]) res.mapping[v] = res.pool_index;

    std::set<std::pair<int, int>> es;
    for (int u = 0; u < g.n; ++u)
        for (int v : g.adj[u]) {
            if (u >= v) continue;
            int mu = res.mapping[u], mv = res.mapping[v];
            if (mu == mv) continue;
            es.insert(std::minmax(mu, mv));
        }
    res.graph = detail::graph_from_edge_set(res.pool_index + 1, es);
    return res;
}

// --- serialization ---

inline nlohmann::ordered_json graph_to_json(const NetworkGraph& g) {
    nlohmann::ordered_json j;
    j["n"] = g.n;
    auto es = g.edges();
    nlohmann::ordered_json edges = nlohmann::ordered_json::array();
    for (auto& [u, v] : es) edges.push_back({u, v});
    j["edges"] = std::move(edges);
    if (!g.labels.empty()) j["labels"] = g.labels;
    if (g.spec) {
        nlohmann::ordered_json s;
        s["family"] = g.spec->family;
        s["n"] = g.spec->n;
        s["d"] = g.spec->d;
        s["cluster_pct"] = g.spec->cluster_pct;
        s["seed"] = g.spec->seed;
        j["spec"] = std::move(s);
    } else {
        j["spec"] = nullptr;
    }
    return j;
}

inline NetworkGraph graph_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("edges"))
        throw std::invalid_argument("graph_from_json: need object with 'n' and 'edges'");
    NetworkGraph g;
    g.n = j.at("n").get<int>();
    if (g.n < 1) throw std::invalid_argument("graph_from_json: n must be >= 1");
    std::set<std::pair<int, int>> es;
    for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw std::invalid_argument("graph_from_json: malformed edge entry");
        int u = e[0].get<int>(), v = e[1].get<int>();
        if (u < 0 || v < 0 || u >= g.n || v >= g.n || u == v)
            throw std::invalid_argument("graph_from_json: edge endpoints out of range");
        es.insert(std::minmax(u, v));
    }
    g = detail::graph_from_edge_set(g.n, es);
    if (j.contains("labels") && !j.at("labels").is_null())
        g.labels = j.at("labels").get<std::vector<std::string>>();
    if (j.contains("spec") && j.at("spec").is_object()) {
        const auto& s = j.at("spec");
        GraphSpec gs;
        gs.family = s.at("family").get<std::string>();
        gs.n = s.at("n").get<int>();
        gs.d = s.at("d").get<double>();
        gs.cluster_pct = s.value("cluster_pct", 0);
        gs.seed = s.at("seed").get<std::uint64_t>();
        g.spec = gs;
    }
    auto viol = validate(g);
    if (!viol.empty()) throw std::invalid_argument("graph_from_json: invalid graph: " + viol.front());
    return g;
}

}  // namespace forkwatch
