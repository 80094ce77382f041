#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "forkwatch/graph.hpp"
#include "forkwatch/honest.hpp"
#include "forkwatch/metrics.hpp"
#include "forkwatch/propagation.hpp"
#include "forkwatch/report.hpp"
#include "forkwatch/selfish.hpp"
#include "forkwatch/sim.hpp"

namespace forkwatch {

using ordered_json = nlohmann::ordered_json;

struct AdversarySpec {
    bool selfish = false;
    ExpansionStrategy strategy = ExpansionStrategy::descending_degree;
    std::vector<double> alpha_grid = {0.02, 0.05, 0.10, 0.20, 0.30, 0.40, 0.45};
};

// One experiment = one JSON document. Either an inline graph recipe or a path
// to a previously generated graph file; uniform per-node rates summing to
// pi_total; honest baseline or a selfish-pool sweep.
struct ExperimentSpec {
    std::optional<GraphSpec> graph_spec;
    std::string graph_path;  // used when graph_spec is absent
    double pi_total = 0.01;
    AdversarySpec adversary;
    long long slots = 10'000'000;
    std::vector<std::uint64_t> seeds = {1};
    std::string outputs = "out";

    static ExperimentSpec from_json(const ordered_json& j);
    static ExperimentSpec from_file(const std::string& path);
    ordered_json to_json() const;

    // identifies the experiment itself, so the output directory is excluded
    std::string hash() const {
        ordered_json j = to_json();
        j.erase("outputs");
        return fnv1a_hex(j.dump());
    }
};

namespace detail {

inline const ordered_json& need(const ordered_json& j, const char* key, const char* where) {
    auto it = j.find(key);
    if (it == j.end())
        throw std::invalid_argument(std::string(where) + ": missing required field '" + key + "'");
    return *it;
}

inline double need_number(const ordered_json& j, const char* key, const char* where) {
    const ordered_json& v = need(j, key, where);
    if (!v.is_number())
        throw std::invalid_argument(std::string(where) + "." + key + ": expected a number");
    return v.get<double>();
}

}  // namespace detail

inline ExperimentSpec ExperimentSpec::from_json(const ordered_json& j) {
    if (!j.is_object()) throw std::invalid_argument("spec: top level must be a JSON object");
    ExperimentSpec spec;

    const ordered_json& jg = detail::need(j, "graph", "spec");
    if (!jg.is_object()) throw std::invalid_argument("spec.graph: expected an object");
    if (jg.contains("path")) {
        if (!jg["path"].is_string())
            throw std::invalid_argument("spec.graph.path: expected a string");
        spec.graph_path = jg["path"].get<std::string>();
        if (spec.graph_path.empty())
            throw std::invalid_argument("spec.graph.path: must be non-empty");
    } else {
        GraphSpec gs;
        const ordered_json& jf = detail::need(jg, "family", "spec.graph");
        if (!jf.is_string()) throw std::invalid_argument("spec.graph.family: expected a string");
        gs.family = jf.get<std::string>();
        if (gs.family != "regular" && gs.family != "regular_clustered" &&
            gs.family != "exponential")
            throw std::invalid_argument(
                "spec.graph.family: expected regular | regular_clustered | exponential, got '" +
                gs.family + "'");
        gs.n = static_cast<int>(detail::need_number(jg, "n", "spec.graph"));
        gs.d = detail::need_number(jg, "d", "spec.graph");
        gs.cluster_pct = jg.contains("cluster_pct")
                             ? static_cast<int>(detail::need_number(jg, "cluster_pct", "spec.graph"))
                             : 0;
        gs.seed = jg.contains("seed")
                      ? static_cast<std::uint64_t>(detail::need_number(jg, "seed", "spec.graph"))
                      : 1;
        if (gs.n < 1) throw std::invalid_argument("spec.graph.n: must be >= 1");
        if (gs.n > 1 && (gs.d < 1 || gs.d >= gs.n))
            throw std::invalid_argument("spec.graph.d: must satisfy 1 <= d < n");
        if (gs.cluster_pct < 0 || gs.cluster_pct > 100)
            throw std::invalid_argument("spec.graph.cluster_pct: must be in [0, 100]");
        spec.graph_spec = gs;
    }

    spec.pi_total = detail::need_number(j, "pi_total", "spec");
    if (!(spec.pi_total > 0.0) || spec.pi_total > 0.5)
        throw std::invalid_argument("spec.pi_total: must be in (0, 0.5]");

    const ordered_json& ja = detail::need(j, "adversary", "spec");
    std::string type = detail::need(ja, "type", "spec.adversary").get<std::string>();
    if (type == "honest") {
        spec.adversary.selfish = false;
    } else if (type == "selfish") {
        spec.adversary.selfish = true;
        if (ja.contains("strategy")) {
            std::string s = ja["strategy"].get<std::string>();
            if (s == "descending_degree") spec.adversary.strategy = ExpansionStrategy::descending_degree;
            else if (s == "ascending_index") spec.adversary.strategy = ExpansionStrategy::ascending_index;
            else if (s == "random_order") spec.adversary.strategy = ExpansionStrategy::random_order;
            else
                throw std::invalid_argument(
                    "spec.adversary.strategy: expected descending_degree | ascending_index | "
                    "random_order, got '" + s + "'");
        }
        if (ja.contains("alpha_grid")) {
            if (!ja["alpha_grid"].is_array() || ja["alpha_grid"].empty())
                throw std::invalid_argument("spec.adversary.alpha_grid: expected a non-empty array");
            spec.adversary.alpha_grid.clear();
            for (const auto& v : ja["alpha_grid"]) {
                if (!v.is_number())
                    throw std::invalid_argument("spec.adversary.alpha_grid: entries must be numbers");
                double a = v.get<double>();
                if (!(a > 0.0) || a > 0.5)
                    throw std::invalid_argument("spec.adversary.alpha_grid: entry " +
                                                std::to_string(a) + " outside (0, 0.5]");
                spec.adversary.alpha_grid.push_back(a);
            }
        }
    } else {
        throw std::invalid_argument("spec.adversary.type: expected honest | selfish, got '" + type +
                                    "'");
    }

    double slots = detail::need_number(j, "slots", "spec");
    if (slots < 1) throw std::invalid_argument("spec.slots: must be >= 1");
    spec.slots = static_cast<long long>(slots);

    const ordered_json& js = detail::need(j, "seeds", "spec");
    if (!js.is_array() || js.empty())
        throw std::invalid_argument("spec.seeds: expected a non-empty array");
    spec.seeds.clear();
    for (const auto& v : js) {
        if (!v.is_number())
            throw std::invalid_argument("spec.seeds: entries must be unsigned integers");
        spec.seeds.push_back(v.get<std::uint64_t>());
    }

    if (j.contains("outputs")) {
        if (!j["outputs"].is_string())
            throw std::invalid_argument("spec.outputs: expected a directory path string");
        spec.outputs = j["outputs"].get<std::string>();
    }
    return spec;
}

inline ExperimentSpec ExperimentSpec::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open spec file: " + path);
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const std::exception& e) {
        throw std::invalid_argument("spec: " + path + " is not valid JSON: " + e.what());
    }
    return from_json(j);
}

inline ordered_json ExperimentSpec::to_json() const {
    ordered_json j;
    if (graph_spec) {
        const GraphSpec& gs = *graph_spec;
        j["graph"] = {{"family", gs.family},
                      {"n", gs.n},
                      {"d", gs.d},
                      {"cluster_pct", gs.cluster_pct},
                      {"seed", gs.seed}};
    } else {
        j["graph"] = {{"path", graph_path}};
    }
    j["pi_total"] = pi_total;
    if (adversary.selfish) {
        j["adversary"] = {{"type", "selfish"},
                          {"strategy", to_string(adversary.strategy)},
                          {"alpha_grid", adversary.alpha_grid}};
    } else {
        j["adversary"] = {{"type", "honest"}};
    }
    j["slots"] = slots;
    j["seeds"] = seeds;
    j["outputs"] = outputs;
    return j;
}

inline NetworkGraph build_graph(const ExperimentSpec& spec) {
    if (spec.graph_spec) {
        const GraphSpec& gs = *spec.graph_spec;
        if (gs.family == "regular") return gen_regular(gs.n, static_cast<int>(gs.d), gs.seed);
        if (gs.family == "regular_clustered")
            return gen_regular_clustered(gs.n, static_cast<int>(gs.d), gs.cluster_pct, gs.seed);
        if (gs.family == "exponential") return gen_exponential(gs.n, gs.d, gs.seed);
        throw std::logic_error("build_graph: unknown family " + gs.family);
    }
    std::ifstream in(spec.graph_path);
    if (!in) throw std::runtime_error("cannot open graph file: " + spec.graph_path);
    ordered_json j = ordered_json::parse(in);
    return graph_from_json(j);
}

namespace detail {

// Fan njobs out over a bounded worker pool; job i writes only slot i of the
// caller's result vector, so the merge is deterministic regardless of timing.
template <typename F>
inline void run_parallel(int njobs, int workers, F&& f) {
    workers = std::max(1, std::min(workers, njobs));
    if (workers <= 1) {
        for (int i = 0; i < njobs; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex err_mu;
    std::exception_ptr err;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= njobs) return;
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};

inline MeanStderr mean_stderr(const std::vector<double>& xs) {
    MeanStderr r;
    if (xs.empty()) return r;
    for (double x : xs) r.mean += x;
    r.mean /= static_cast<double>(xs.size());
    if (xs.size() >= 2) {
        double ss = 0.0;
        for (double x : xs) ss += (x - r.mean) * (x - r.mean);
        r.stderr_ = std::sqrt(ss / static_cast<double>(xs.size() - 1) /
                              static_cast<double>(xs.size()));
    }
    return r;
}

}  // namespace detail

struct SelfishAlphaResult {
    SelfishPoint ana;
    std::vector<int> members;
    std::vector<SimReport> runs;  // one per seed
    double revenue_share_mean = 0.0, revenue_share_stderr = 0.0;
    double rmg_mean = 0.0, rmg_stderr = 0.0;
    std::optional<double> gamma_mean;
};

// What a run computes: the analytic side, the simulated side, or both (full
// adds the comparison block).
enum class RunMode { analysis, simulation, full };

struct ExperimentResult {
    ExperimentResult(ExperimentSpec s, std::string hash, NetworkGraph g, MiningProfile profile,
                     RunMode m)
        : spec(std::move(s)), spec_hash(std::move(hash)), graph(std::move(g)),
          mp(std::move(profile)), mode(m) {}

    ExperimentSpec spec;
    std::string spec_hash;
    NetworkGraph graph;
    MiningProfile mp;
    RunMode mode = RunMode::full;

    // honest runs
    std::optional<HonestAnalysisReport> honest_ana;
    std::vector<SimReport> honest_runs;
    std::vector<double> mr_sim_mean, rmg_sim_mean;
    double fr_sim_mean = 0.0, fr_sim_stderr = 0.0;
    double at50_sim = 0.0;
    double rmse_rmg = 0.0;

    // selfish runs
    std::optional<SelfishCurve> curve;
    std::vector<SelfishAlphaResult> alpha_results;
    std::optional<double> prth_sim_fit, prth_sim_grid;
    std::optional<double> at50_sim_fit, at50_sim_grid;
    double rmse_pool_rmg = 0.0;
};

inline ExperimentResult run_experiment(const ExperimentSpec& spec, int workers = 1,
                                       RunMode mode = RunMode::full) {
    NetworkGraph g = build_graph(spec);
    MiningProfile mp = MiningProfile::uniform(g.n, spec.pi_total);
    ExperimentResult res{spec, spec.hash(), std::move(g), std::move(mp), mode};
    int nseeds = static_cast<int>(spec.seeds.size());

    if (!spec.adversary.selfish) {
        if (mode != RunMode::simulation) res.honest_ana = analyze_honest(res.graph, res.mp);
        if (mode != RunMode::analysis) {
            res.honest_runs.resize(nseeds);
            detail::run_parallel(nseeds, workers, [&](int i) {
                res.honest_runs[i] = simulate_honest(res.graph, res.mp, spec.slots, spec.seeds[i]);
            });

            int n = res.graph.n;
            res.mr_sim_mean.assign(n, 0.0);
            std::vector<double> frs;
            for (const SimReport& r : res.honest_runs) {
                frs.push_back(r.fork_rate_sim);
                for (int v = 0; v < n; ++v) res.mr_sim_mean[v] += r.per_node_mr[v];
            }
            for (int v = 0; v < n; ++v) res.mr_sim_mean[v] /= nseeds;
            res.rmg_sim_mean.assign(n, 0.0);
            for (int v = 0; v < n; ++v) {
                double share = res.mp.share(v);
                res.rmg_sim_mean[v] = (res.mr_sim_mean[v] - share) / share;
            }
            auto fr = detail::mean_stderr(frs);
            res.fr_sim_mean = fr.mean;
            res.fr_sim_stderr = fr.stderr_;
            std::vector<double> shares(n);
            for (int v = 0; v < n; ++v) shares[v] = res.mp.share(v);
            res.at50_sim = at50_from_mr(res.mr_sim_mean, shares);
        }
        if (mode == RunMode::full) res.rmse_rmg = rmse(res.honest_ana->rmg, res.rmg_sim_mean);
        return res;
    }

    // randomized expansion order keyed on the graph seed so the pool roster
    // does not change when simulation seeds do
    std::uint64_t order_seed = spec.graph_spec ? spec.graph_spec->seed : 0;
    res.curve = expansion_sweep(res.graph, res.mp, spec.adversary.strategy,
                                spec.adversary.alpha_grid, order_seed);
    if (mode == RunMode::analysis) return res;

    std::vector<int> order = expansion_order(res.graph, spec.adversary.strategy, order_seed);
    int npoints = static_cast<int>(res.curve->points.size());
    res.alpha_results.resize(npoints);
    for (int i = 0; i < npoints; ++i) {
        res.alpha_results[i].ana = res.curve->points[i];
        res.alpha_results[i].members.assign(order.begin(),
                                            order.begin() + res.curve->points[i].members);
        res.alpha_results[i].runs.resize(nseeds);
    }
    detail::run_parallel(npoints * nseeds, workers, [&](int j) {
        int i = j / nseeds, s = j % nseeds;
        SelfishConfig sc = SelfishConfig::from_members(res.mp, res.alpha_results[i].members);
        res.alpha_results[i].runs[s] =
            simulate_selfish(res.graph, res.mp, sc, spec.slots, spec.seeds[s]);
    });

    std::vector<double> xs, rmg_ana, rmg_sim, share_sim;
    for (SelfishAlphaResult& ar : res.alpha_results) {
        std::vector<double> shares, rmgs, gammas;
        for (const SimReport& r : ar.runs) {
            shares.push_back(r.per_node_mr[r.pool_index]);
            rmgs.push_back(r.per_node_rmg[r.pool_index]);
            if (r.gamma_sim) gammas.push_back(*r.gamma_sim);
        }
        auto sh = detail::mean_stderr(shares);
        auto rm = detail::mean_stderr(rmgs);
        ar.revenue_share_mean = sh.mean;
        ar.revenue_share_stderr = sh.stderr_;
        ar.rmg_mean = rm.mean;
        ar.rmg_stderr = rm.stderr_;
        if (!gammas.empty()) ar.gamma_mean = detail::mean_stderr(gammas).mean;

        xs.push_back(ar.ana.alpha);
        rmg_ana.push_back(ar.ana.rmg);
        rmg_sim.push_back(ar.rmg_mean);
        share_sim.push_back(ar.revenue_share_mean);
    }
    if (mode == RunMode::full) res.rmse_pool_rmg = rmse(rmg_ana, rmg_sim);
    if (npoints >= 2) {
        PolyFit rf = fit_poly(xs, rmg_sim, 7);
        PolyFit sf = fit_poly(xs, share_sim, 7);
        if (auto c = threshold_crossing(rf, xs, rmg_sim, 0.0)) res.prth_sim_fit = c->x;
        if (auto c = threshold_crossing(sf, xs, share_sim, 0.5)) res.at50_sim_fit = c->x;
        res.prth_sim_grid = linear_crossing(xs, rmg_sim, 0.0);
        res.at50_sim_grid = linear_crossing(xs, share_sim, 0.5);
    }
    return res;
}

namespace detail {

inline ordered_json opt_json(const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

inline ordered_json crossing_json(const std::optional<Crossing>& c) {
    if (!c) return nullptr;
    return ordered_json{{"x", c->x}, {"linear_fallback", c->used_linear_fallback}};
}

}  // namespace detail

inline ordered_json report_json(const ExperimentResult& res) {
    ordered_json j;
    j["kind"] = "experiment_report";
    j["spec_hash"] = res.spec_hash;
    j["spec"] = res.spec.to_json();
    j["graph_summary"] = {{"n", res.graph.n}, {"edges", res.graph.edge_count()}};
    j["analysis"] = nullptr;
    j["simulation"] = nullptr;
    j["comparison"] = nullptr;

    if (!res.spec.adversary.selfish) {
        if (res.honest_ana) {
            const HonestAnalysisReport& a = *res.honest_ana;
            ordered_json ja;
            ja["type"] = "honest";
            ja["fork_rate"] = a.fork_rate;
            if (res.mp.is_uniform())
                ja["fork_rate_uniform_approx"] = fork_rate_uniform_approx(res.graph, res.mp);
            ja["at50"] = a.at50;
            ja["expected_win"] = a.expected_win;
            ja["rmg"] = a.rmg;
            j["analysis"] = ja;
        }
        if (!res.honest_runs.empty()) {
            ordered_json sim;
            sim["type"] = "honest";
            ordered_json per_seed = ordered_json::array();
            for (const SimReport& r : res.honest_runs) {
                per_seed.push_back({{"seed", r.seed},
                                    {"slots", r.slots},
                                    {"fork_rate_sim", r.fork_rate_sim},
                                    {"canonized_height", r.canonized_height},
                                    {"blocks_total", r.blocks_total},
                                    {"stale_blocks", r.stale_blocks},
                                    {"canonization_count", r.canonization_count},
                                    {"w_events", r.w_events}});
            }
            sim["per_seed"] = per_seed;
            sim["mr_mean"] = res.mr_sim_mean;
            sim["rmg_mean"] = res.rmg_sim_mean;
            sim["fr_mean"] = res.fr_sim_mean;
            sim["fr_stderr"] = res.fr_sim_stderr;
            sim["at50_sim"] = res.at50_sim;
            j["simulation"] = sim;
        }
        if (res.honest_ana && !res.honest_runs.empty()) {
            j["comparison"] = {{"fr_ana", res.honest_ana->fork_rate},
                               {"fr_sim", res.fr_sim_mean},
                               {"fr_sim_stderr", res.fr_sim_stderr},
                               {"at50_ana", res.honest_ana->at50},
                               {"at50_sim", res.at50_sim},
                               {"rmse_rmg", res.rmse_rmg}};
        }
        return j;
    }

    const SelfishCurve& c = *res.curve;
    if (res.mode != RunMode::simulation) {
        ordered_json ja;
        ja["type"] = "selfish";
        ja["strategy"] = to_string(c.strategy);
        ordered_json pts = ordered_json::array();
        for (const SelfishPoint& p : c.points)
            pts.push_back({{"alpha", p.alpha},
                           {"members", p.members},
                           {"gamma_ana", p.gamma},
                           {"revenue_ana", p.revenue_share},
                           {"rmg_ana", p.rmg}});
        ja["points"] = pts;
        ja["prth_fit"] = detail::crossing_json(c.prth);
        ja["prth_grid"] = detail::opt_json(c.prth_grid);
        ja["at50_fit"] = detail::crossing_json(c.at50);
        ja["at50_grid"] = detail::opt_json(c.at50_grid);
        j["analysis"] = ja;
    }
    bool has_runs = !res.alpha_results.empty() && !res.alpha_results.front().runs.empty();
    if (has_runs) {
        ordered_json sim;
        sim["type"] = "selfish";
        ordered_json per_alpha = ordered_json::array();
        for (const SelfishAlphaResult& ar : res.alpha_results) {
            ordered_json per_seed = ordered_json::array();
            for (const SimReport& r : ar.runs) {
                per_seed.push_back({{"seed", r.seed},
                                    {"slots", r.slots},
                                    {"revenue_share", r.per_node_mr[r.pool_index]},
                                    {"rmg", r.per_node_rmg[r.pool_index]},
                                    {"gamma", detail::opt_json(r.gamma_sim)},
                                    {"gamma_races", r.gamma_races},
                                    {"releases", r.releases},
                                    {"canonized_height", r.canonized_height},
                                    {"blocks_total", r.blocks_total}});
            }
            per_alpha.push_back({{"alpha", ar.ana.alpha},
                                 {"members", ar.members},
                                 {"per_seed", per_seed},
                                 {"revenue_share_mean", ar.revenue_share_mean},
                                 {"revenue_share_stderr", ar.revenue_share_stderr},
                                 {"rmg_mean", ar.rmg_mean},
                                 {"rmg_stderr", ar.rmg_stderr},
                                 {"gamma_mean", detail::opt_json(ar.gamma_mean)}});
        }
        sim["per_alpha"] = per_alpha;
        sim["prth_sim_fit"] = detail::opt_json(res.prth_sim_fit);
        sim["prth_sim_grid"] = detail::opt_json(res.prth_sim_grid);
        sim["at50_sim_fit"] = detail::opt_json(res.at50_sim_fit);
        sim["at50_sim_grid"] = detail::opt_json(res.at50_sim_grid);
        j["simulation"] = sim;
    }
    if (res.mode == RunMode::full && has_runs) {
        j["comparison"] = {{"prth_ana_fit", detail::crossing_json(c.prth)},
                           {"prth_ana_grid", detail::opt_json(c.prth_grid)},
                           {"prth_sim_fit", detail::opt_json(res.prth_sim_fit)},
                           {"prth_sim_grid", detail::opt_json(res.prth_sim_grid)},
                           {"at50_ana_fit", detail::crossing_json(c.at50)},
                           {"at50_ana_grid", detail::opt_json(c.at50_grid)},
                           {"at50_sim_fit", detail::opt_json(res.at50_sim_fit)},
                           {"at50_sim_grid", detail::opt_json(res.at50_sim_grid)},
                           {"rmse_pool_rmg", res.rmse_pool_rmg}};
    }
    return j;
}

// Renders the selected formats under out_dir; returns the paths written.
// JSON: report.json. CSV: per_node.csv (honest) / curve.csv (selfish).
// SVG: rmg_hist.svg + rmg_compare.svg (honest) / curve.svg (selfish).
inline std::vector<std::filesystem::path> write_outputs(const ExperimentResult& res,
                                                        const std::filesystem::path& out_dir,
                                                        bool json, bool csv, bool svg) {
    std::vector<std::filesystem::path> written;
    std::string seeds_str;
    for (std::size_t i = 0; i < res.spec.seeds.size(); ++i)
        seeds_str += (i ? "," : "") + std::to_string(res.spec.seeds[i]);
    std::string provenance = "spec_hash=" + res.spec_hash + " seeds=" + seeds_str +
                             " slots=" + std::to_string(res.spec.slots);

    if (json) {
        auto p = out_dir / "report.json";
        write_text_atomic(p, report_json(res).dump(2) + "\n");
        written.push_back(p);
    }
    bool honest = !res.spec.adversary.selfish;
    // keyed on the aggregated vectors, not raw runs, so results reconstructed
    // from a serialized report render the same way as fresh ones
    bool has_sim = honest ? !res.mr_sim_mean.empty() : !res.alpha_results.empty();
    bool has_ana = honest ? res.honest_ana.has_value()
                          : res.curve.has_value() && !res.curve->points.empty() &&
                                res.mode != RunMode::simulation;

    if (csv) {
        if (honest) {
            auto p = out_dir / "per_node.csv";
            write_text_atomic(
                p, per_node_csv(res.graph, res.mp,
                                res.honest_ana ? &res.honest_ana->expected_win : nullptr,
                                res.honest_ana ? &res.honest_ana->rmg : nullptr,
                                has_sim ? &res.mr_sim_mean : nullptr,
                                has_sim ? &res.rmg_sim_mean : nullptr, provenance));
            written.push_back(p);
        } else {
            auto p = out_dir / "curve.csv";
            std::vector<std::optional<double>> gsim, rsim;
            for (const SelfishAlphaResult& ar : res.alpha_results) {
                gsim.push_back(ar.gamma_mean);
                rsim.push_back(ar.rmg_mean);
            }
            write_text_atomic(p, curve_csv(*res.curve, has_sim ? &gsim : nullptr,
                                           has_sim ? &rsim : nullptr, provenance));
            written.push_back(p);
        }
    }
    if (svg) {
        std::string comment = "<!-- " + provenance + " -->\n";
        if (honest) {
            const std::vector<double>& hist_src =
                res.honest_ana ? res.honest_ana->rmg : res.rmg_sim_mean;
            auto p1 = out_dir / "rmg_hist.svg";
            write_text_atomic(
                p1, comment + svg_histogram(rmg_histogram(hist_src),
                                            res.honest_ana ? "Relative mining gain (analytic)"
                                                           : "Relative mining gain (simulated)",
                                            "rmg"));
            written.push_back(p1);
            if (res.honest_ana && has_sim) {
                std::vector<int> idx(res.graph.n);
                for (int i = 0; i < res.graph.n; ++i) idx[i] = i;
                std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
                    return res.honest_ana->rmg[a] < res.honest_ana->rmg[b];
                });
                SvgSeries ana{"analytic", "#1f6fb2", {}, {}};
                SvgSeries sim_s{"simulated", "#d2691e", {}, {}};
                for (int r = 0; r < res.graph.n; ++r) {
                    ana.xs.push_back(r);
                    ana.ys.push_back(res.honest_ana->rmg[idx[r]]);
                    sim_s.xs.push_back(r);
                    sim_s.ys.push_back(res.rmg_sim_mean[idx[r]]);
                }
                auto p2 = out_dir / "rmg_compare.svg";
                write_text_atomic(p2,
                                  comment + svg_line_chart({ana, sim_s},
                                                           "Per-node relative mining gain",
                                                           "node rank (by analytic rmg)", "rmg"));
                written.push_back(p2);
            }
        } else {
            std::vector<SvgSeries> series;
            if (has_ana) {
                SvgSeries ra{"revenue analytic", "#1f6fb2", {}, {}};
                SvgSeries ma{"rmg analytic", "#2e8b57", {}, {}};
                for (const SelfishPoint& p : res.curve->points) {
                    ra.xs.push_back(p.alpha);
                    ra.ys.push_back(p.revenue_share);
                    ma.xs.push_back(p.alpha);
                    ma.ys.push_back(p.rmg);
                }
                series.push_back(ra);
                series.push_back(ma);
            }
            if (has_sim) {
                SvgSeries rs{"revenue simulated", "#d2691e", {}, {}};
                SvgSeries ms{"rmg simulated", "#a0522d", {}, {}};
                for (const SelfishAlphaResult& ar : res.alpha_results) {
                    rs.xs.push_back(ar.ana.alpha);
                    rs.ys.push_back(ar.revenue_share_mean);
                    ms.xs.push_back(ar.ana.alpha);
                    ms.ys.push_back(ar.rmg_mean);
                }
                series.push_back(rs);
                series.push_back(ms);
            }
            auto p = out_dir / "curve.svg";
            write_text_atomic(p, comment + svg_line_chart(series,
                                                          "Pool revenue and gain vs pool power",
                                                          "alpha", "share / rmg"));
            written.push_back(p);
        }
    }
    return written;
}

}  // namespace forkwatch
