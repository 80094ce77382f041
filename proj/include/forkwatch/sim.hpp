#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "forkwatch/graph.hpp"
#include "forkwatch/propagation.hpp"
#include "forkwatch/rng.hpp"
#include "forkwatch/selfish.hpp"

namespace forkwatch {

struct SimReport {
    std::uint64_t seed = 0;
    long long slots = 0;
    int n = 0;

    long long blocks_total = 0;      // blocks created (genesis excluded)
    long long canonized_height = 0;  // settled chain length at the end of the run
    long long stale_blocks = 0;      // blocks_total - canonized_height
    long long canonization_count = 0;
    long long forked_heights = 0;    // settled heights where >= 2 blocks were created
    double fork_rate_sim = 0.0;

    std::vector<long long> canonized_by;  // per node, over the settled chain
    std::vector<double> per_node_mr;
    std::vector<double> per_node_rmg;

    std::vector<long long> w_counts;  // winner of the first height after each canonization event
    long long w_events = 0;

    // selfish runs only
    int pool_index = -1;
    double pool_alpha = 0.0;
    long long releases = 0;     // private chain (partial or full) publications
    long long gamma_races = 0;  // single-block release races sampled
    std::optional<double> gamma_sim;
};

inline double measure_fork_rate(const SimReport& rep) {
    if (rep.canonized_height <= 0) throw std::invalid_argument("measure_fork_rate: run settled no heights");
    return rep.fork_rate_sim;
}

inline std::vector<double> measure_w_process(const SimReport& rep) {
    std::vector<double> freq(rep.w_counts.size(), 0.0);
    if (rep.w_events > 0)
        for (std::size_t i = 0; i < freq.size(); ++i)
            freq[i] = static_cast<double>(rep.w_counts[i]) / static_cast<double>(rep.w_events);
    return freq;
}

namespace detail {

struct SimBlock {
    int height;
    int parent;
    int miner;
};

struct Delivery {
    int to;
    int block;
    int from;
};

// One network trajectory. Slots run deliver -> update tips -> mine ->
// schedule; blocks move one hop per slot and only accepted heads are relayed.
// At most one block is produced per slot network-wide (probability = total
// rate, miner drawn proportionally), the discrete analog of merged arrivals:
// per-node production is still Bernoulli(rate_i) per slot, but simultaneous
// births — excluded by the continuous-time model — cannot occur. Stretches
// with nothing in flight are fast-forwarded with a geometric draw, which
// leaves the trajectory distribution unchanged.
class SimEngine {
public:
    SimEngine(const NetworkGraph& g, const MiningProfile& mp, long long slots, std::uint64_t seed,
              int pool_index)
        : g_(g), mp_(mp), slots_(slots), rng_(seed), pool_(pool_index) {
        if (mp.size() != g.n) throw std::invalid_argument("simulate: profile/graph size mismatch");
        if (slots < 1) throw std::invalid_argument("simulate: slots must be >= 1");
        rep_.seed = seed;
        rep_.slots = slots;
        rep_.n = g.n;
        rep_.pool_index = pool_;

        blocks_.push_back({0, -1, -1});  // genesis
        births_.push_back(1);
        tip_.assign(g.n, 0);
        inbox_.assign(g.n, {});
        canon_events_.push_back(0);  // network starts settled at genesis

        cum_rates_.resize(g.n);
        double acc = 0.0;
        for (int i = 0; i < g.n; ++i) {
            acc += mp.rates[i];
            cum_rates_[i] = acc;
        }
    }

    SimReport run() {
        long long t = 0;
        while (t < slots_) {
            if (current_.empty()) {
                // idle network: jump straight to the next birth
                long long k = static_cast<long long>(rng_.geometric(mp_.total));
                if (t > slots_ - k) break;
                t += k;
                mine_block(pick_miner(rng_.uniform() * mp_.total));
            } else {
                ++t;
                deliver();
                double u = rng_.uniform();
                if (u < mp_.total) mine_block(pick_miner(u));
            }
            end_of_slot();
            current_.swap(next_);
            next_.clear();
        }
        finalize();
        return rep_;
    }

private:
    int tip_height(int v) const { return blocks_[tip_[v]].height; }

    int pick_miner(double x) const {
        return static_cast<int>(std::upper_bound(cum_rates_.begin(), cum_rates_.end(), x) -
                                cum_rates_.begin());
    }

    void schedule(int from, int block, const std::vector<int>& skip) {
        for (int w : g_.adj[from]) {
            if (std::find(skip.begin(), skip.end(), w) != skip.end()) continue;
            next_.push_back({w, block, from});
        }
    }

    int new_block(int parent, int miner) {
        int id = static_cast<int>(blocks_.size());
        int h = blocks_[parent].height + 1;
        blocks_.push_back({h, parent, miner});
        if (static_cast<int>(births_.size()) <= h) births_.resize(h + 1, 0);
        ++births_[h];
        ++rep_.blocks_total;
        return id;
    }

    void mine_block(int miner) {
        if (miner == pool_) {
            pool_mine();
            return;
        }
        int b = new_block(tip_[miner], miner);
        tip_[miner] = b;
        schedule(miner, b, {});
    }

    // --- delivery phase ---

    void deliver() {
        touched_.clear();
        for (const Delivery& d : current_) {
            if (inbox_[d.to].empty()) touched_.push_back(d.to);
            inbox_[d.to].push_back({d.block, d.from});
        }
        std::sort(touched_.begin(), touched_.end());
        for (int u : touched_) {
            if (u == pool_) pool_receive(inbox_[u]);
            else node_receive(u, inbox_[u]);
            inbox_[u].clear();
        }
    }

    // Longest chain wins; a new-height tie is broken in proportion to how
    // many distinct neighbors delivered each candidate this slot; an
    // equal-height competitor to the current tip is noted but never adopted
    // or relayed.
    void node_receive(int u, const std::vector<std::pair<int, int>>& arrivals) {
        int best_h = tip_height(u);
        for (auto& [b, from] : arrivals) best_h = std::max(best_h, blocks_[b].height);
        if (best_h <= tip_height(u)) return;

        cand_.clear();
        for (auto& [b, from] : arrivals) {
            if (blocks_[b].height != best_h) continue;
            bool seen = false;
            for (auto& c : cand_)
                if (c.first == b) {
                    ++c.second;
                    seen = true;
                    break;
                }
            if (!seen) cand_.push_back({b, 1});
        }
        int chosen = cand_[0].first;
        if (cand_.size() > 1) {
            std::sort(cand_.begin(), cand_.end());
            int total = 0;
            for (auto& c : cand_) total += c.second;
            double x = rng_.uniform() * total;
            int acc = 0;
            chosen = cand_.back().first;
            for (auto& c : cand_) {
                acc += c.second;
                if (x < acc) { chosen = c.first; break; }
            }
        }
        accept(u, chosen, arrivals);
    }

    void accept(int u, int block, const std::vector<std::pair<int, int>>& arrivals) {
        tip_[u] = block;
        skip_.clear();
        for (auto& [b, from] : arrivals)
            if (b == block) skip_.push_back(from);  // deliverers already hold it
        schedule(u, block, skip_);
    }

    // --- pool behavior (selfish runs) ---

    int pool_best_height() const {
        return priv_.empty() ? pub_height_ : blocks_[priv_.back()].height;
    }

    void pool_receive(const std::vector<std::pair<int, int>>& arrivals) {
        int best = -1, best_h = pub_height_;
        for (auto& [b, from] : arrivals)
            if (blocks_[b].height > best_h) {
                best_h = blocks_[b].height;
                best = b;
            }
        if (best < 0) return;  // nothing advances the public view

        if (priv_.empty()) {
            // plain relay node; its own released block was accepted first, so
            // an equal-height competitor never displaces it
            pub_height_ = best_h;
            if (in_race_ && best_h > race_height_) in_race_ = false;
            accept(pool_, best, arrivals);
            return;
        }

        pub_height_ = best_h;
        int lead = blocks_[priv_.back()].height - best_h;
        if (lead < 0) {
            // public chain overtook the private one: withholding lost
            priv_.clear();
            accept(pool_, best, arrivals);
            return;
        }
        if (lead >= 2) {
            // stay hidden; surface only the portion the public has caught up to
            publish_until(best_h);
            return;  // trigger block is not relayed
        }
        // lead 0 or 1: the whole private chain comes out. Lead 1 overrides the
        // public head outright; lead 0 is an even race decided by propagation.
        bool race = (lead == 0);
        bool single = (priv_.size() == 1);
        int head = priv_.back();
        publish_until(blocks_[head].height);
        pub_height_ = blocks_[head].height;
        tip_[pool_] = head;
        if (race) {
            in_race_ = true;
            race_height_ = blocks_[head].height;
            if (single) pending_races_.push_back({head, race_height_});
        }
    }

    void publish_until(int height) {
        std::size_t i = 0;
        for (; i < priv_.size() && blocks_[priv_[i]].height <= height; ++i)
            schedule(pool_, priv_[i], {});
        if (i > 0) {
            priv_.erase(priv_.begin(), priv_.begin() + i);
            ++rep_.releases;
        }
    }

    void pool_mine() {
        if (in_race_) {
            // building on its own contested block resolves the race in the
            // pool's favor; the new block is published immediately
            int b = new_block(tip_[pool_], pool_);
            tip_[pool_] = b;
            pub_height_ = blocks_[b].height;
            in_race_ = false;
            schedule(pool_, b, {});
            return;
        }
        int parent = priv_.empty() ? tip_[pool_] : priv_.back();
        int b = new_block(parent, pool_);
        priv_.push_back(b);
        tip_[pool_] = b;  // mining base; not announced
    }

    // --- end-of-slot bookkeeping ---

    void end_of_slot() {
        if (!pending_races_.empty()) sample_settled_races();
        if (next_.empty()) maybe_canonize();
    }

    void sample_settled_races() {
        for (std::size_t i = 0; i < pending_races_.size();) {
            int h = pending_races_[i].height;
            bool in_flight = false;
            for (const Delivery& d : next_)
                if (blocks_[d.block].height == h) { in_flight = true; break; }
            if (in_flight) { ++i; continue; }
            // race settled: how much honest power sits on the pool's block?
            double num = 0.0, den = 0.0;
            for (int v = 0; v < g_.n; ++v) {
                if (v == pool_) continue;
                den += mp_.rates[v];
                if (tip_[v] == pending_races_[i].block) num += mp_.rates[v];
            }
            gamma_sum_ += num / den;
            ++rep_.gamma_races;
            pending_races_.erase(pending_races_.begin() + i);
        }
    }

    void maybe_canonize() {
        if (pool_ >= 0 && (!priv_.empty() || in_race_)) return;
        int first = tip_[0];
        for (int v = 1; v < g_.n; ++v)
            if (tip_[v] != first) return;
        if (blocks_[first].height <= blocks_[canon_events_.back()].height) return;
        canon_events_.push_back(first);
        ++rep_.canonization_count;
    }

    int common_ancestor_height(int a, int b) const {
        while (a != b) {
            if (blocks_[a].height > blocks_[b].height) a = blocks_[a].parent;
            else if (blocks_[b].height > blocks_[a].height) b = blocks_[b].parent;
            else { a = blocks_[a].parent; b = blocks_[b].parent; }
        }
        return blocks_[a].height;
    }

    // The settled chain at the end of the run: start from the tip backed by
    // the most mining power and cut off the suffix any held chain still
    // disputes. What remains is agreed on by every node and can no longer be
    // reverted (an accepted head is never displaced by an equal-height rival,
    // so a unanimous prefix is final).
    void finalize() {
        std::vector<int> tips = tip_;
        std::sort(tips.begin(), tips.end());
        tips.erase(std::unique(tips.begin(), tips.end()), tips.end());
        int chosen = tips[0];
        double chosen_power = 0.0;
        for (int cand : tips) {
            double power = 0.0;
            for (int v = 0; v < g_.n; ++v)
                if (tip_[v] == cand) power += mp_.rates[v];
            if (cand == tips[0] || power > chosen_power ||
                (power == chosen_power && blocks_[cand].height > blocks_[chosen].height)) {
                chosen = cand;
                chosen_power = power;
            }
        }
        long long settled = blocks_[chosen].height;
        for (int other : tips)
            if (other != chosen)
                settled = std::min<long long>(settled, common_ancestor_height(chosen, other));

        rep_.canonized_by.assign(g_.n, 0);
        rep_.canonized_height = settled;
        rep_.stale_blocks = rep_.blocks_total - rep_.canonized_height;
        int b = chosen;
        while (blocks_[b].height > settled) b = blocks_[b].parent;
        for (; b != 0; b = blocks_[b].parent) ++rep_.canonized_by[blocks_[b].miner];

        for (int h = 1; h <= rep_.canonized_height; ++h)
            if (births_[h] >= 2) ++rep_.forked_heights;
        rep_.fork_rate_sim = rep_.canonized_height > 0
                                 ? static_cast<double>(rep_.forked_heights) / rep_.canonized_height
                                 : 0.0;

        rep_.per_node_mr.assign(g_.n, 0.0);
        rep_.per_node_rmg.assign(g_.n, 0.0);
        for (int v = 0; v < g_.n; ++v) {
            if (rep_.canonized_height > 0)
                rep_.per_node_mr[v] =
                    static_cast<double>(rep_.canonized_by[v]) / rep_.canonized_height;
            double share = mp_.share(v);
            rep_.per_node_rmg[v] = (rep_.per_node_mr[v] - share) / share;
        }

        // winner of height h(c)+1 for each consecutive event pair
        rep_.w_counts.assign(g_.n, 0);
        for (std::size_t c = 1; c < canon_events_.size(); ++c) {
            int target = blocks_[canon_events_[c - 1]].height + 1;
            int b = canon_events_[c];
            while (blocks_[b].height > target) b = blocks_[b].parent;
            ++rep_.w_counts[blocks_[b].miner];
            ++rep_.w_events;
        }

        if (pool_ >= 0) {
            rep_.pool_alpha = mp_.share(pool_);
            if (rep_.gamma_races > 0) rep_.gamma_sim = gamma_sum_ / rep_.gamma_races;
        }
    }

    const NetworkGraph& g_;
    const MiningProfile& mp_;
    long long slots_;
    Rng rng_;
    int pool_;
    SimReport rep_;

    std::vector<SimBlock> blocks_;
    std::vector<int> births_;
    std::vector<int> tip_;
    std::vector<double> cum_rates_;
    std::vector<Delivery> current_, next_;
    std::vector<std::vector<std::pair<int, int>>> inbox_;
    std::vector<int> touched_;
    std::vector<std::pair<int, int>> cand_;
    std::vector<int> skip_;
    std::vector<int> canon_events_;

    // pool state
    std::vector<int> priv_;  // unpublished private blocks, oldest first
    int pub_height_ = 0;
    bool in_race_ = false;
    int race_height_ = -1;
    struct PendingRace {
        int block;
        int height;
    };
    std::vector<PendingRace> pending_races_;
    double gamma_sum_ = 0.0;
};

}  // namespace detail

inline SimReport simulate_honest(const NetworkGraph& g, const MiningProfile& mp, long long slots,
                                 std::uint64_t seed) {
    if (!is_connected(g)) throw std::invalid_argument("simulate_honest: graph must be connected");
    return detail::SimEngine(g, mp, slots, seed, -1).run();
}

// Runs the network with `sc.members` acting as one block-withholding pool:
// members are contracted to a super node (placed last) that mines on a
// private chain and publishes per the lead-state rules. Reported vectors are
// over the contracted node set; pool_index marks the pool entry.
inline SimReport simulate_selfish(const NetworkGraph& g, const MiningProfile& mp,
                                  const SelfishConfig& sc, long long slots, std::uint64_t seed) {
    if (mp.size() != g.n) throw std::invalid_argument("simulate_selfish: profile/graph size mismatch");
    if (!is_connected(g)) throw std::invalid_argument("simulate_selfish: graph must be connected");
    ContractResult cr = contract_pool(g, sc.members);
    std::vector<double> rates(cr.pool_index + 1, 0.0);
    for (int v = 0; v < g.n; ++v) rates[cr.mapping[v]] += mp.rates[v];
    MiningProfile cmp(std::move(rates));
    return detail::SimEngine(cr.graph, cmp, slots, seed, cr.pool_index).run();
}

}  // namespace forkwatch
