// Experiment driver: gen-graph | analyze | simulate | experiment | report.
// One JSON spec per experiment; CLI flags override spec fields; outputs are
// written atomically and embed the spec hash + seeds for exact reruns.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "forkwatch/experiment.hpp"
#include "forkwatch/graph.hpp"
#include "forkwatch/report.hpp"

namespace fw = forkwatch;

namespace {

struct Overrides {
    std::string spec_path;
    std::string out_dir;
    std::vector<std::uint64_t> seeds;
    long long slots = 0;
    int workers = 0;
    bool desk = false;
    std::vector<std::string> formats;
};

int env_workers() {
    const char* e = std::getenv("FORKWATCH_WORKERS");
    if (!e) return 1;
    int v = std::atoi(e);
    return v >= 1 ? v : 1;
}

void add_common(CLI::App* cmd, Overrides& o, bool with_run_flags) {
    cmd->add_option("--spec", o.spec_path, "experiment spec JSON file")->required();
    cmd->add_option("--out", o.out_dir, "output directory (overrides spec.outputs)");
    cmd->add_option("--format", o.formats, "output formats: csv, json, svg (default: all)")
        ->check(CLI::IsMember({"csv", "json", "svg"}));
    if (with_run_flags) {
        cmd->add_option("--seed", o.seeds, "simulation seed, repeatable (overrides spec.seeds)");
        cmd->add_option("--slots", o.slots, "slot count (overrides spec.slots)");
        cmd->add_option("--workers", o.workers,
                        "concurrent simulation runs (default: $FORKWATCH_WORKERS or 1)");
        cmd->add_flag("--desk", o.desk, "desk-scale preset: n=100 nodes, 1e6 slots");
    }
}

fw::ExperimentSpec load_spec(const Overrides& o) {
    fw::ExperimentSpec spec = fw::ExperimentSpec::from_file(o.spec_path);
    if (!o.out_dir.empty()) spec.outputs = o.out_dir;
    if (!o.seeds.empty()) spec.seeds = o.seeds;
    if (o.slots > 0) spec.slots = o.slots;
    if (o.desk) {
        if (spec.graph_spec) spec.graph_spec->n = 100;
        spec.slots = 1'000'000;
    }
    return spec;
}

struct Formats {
    bool json = true, csv = true, svg = true;
};

Formats pick_formats(const Overrides& o) {
    if (o.formats.empty()) return {};
    Formats f{false, false, false};
    for (const std::string& s : o.formats) {
        if (s == "json") f.json = true;
        else if (s == "csv") f.csv = true;
        else if (s == "svg") f.svg = true;
    }
    return f;
}

int run_pipeline(const Overrides& o, fw::RunMode mode) {
    fw::ExperimentSpec spec = load_spec(o);
    int workers = o.workers > 0 ? o.workers : env_workers();
    fw::ExperimentResult res = fw::run_experiment(spec, workers, mode);
    Formats f = pick_formats(o);
    auto written = fw::write_outputs(res, spec.outputs, f.json, f.csv, f.svg);
    for (const auto& p : written) std::cout << p.string() << "\n";
    return written.empty() ? 1 : 0;
}

int cmd_gen_graph(const Overrides& o) {
    fw::ExperimentSpec spec = load_spec(o);
    fw::NetworkGraph g = fw::build_graph(spec);
    std::filesystem::path p = std::filesystem::path(spec.outputs) / "graph.json";
    fw::write_text_atomic(p, fw::graph_to_json(g).dump(2) + "\n");
    std::cout << p.string() << "\n";
    return 0;
}

// Re-render CSV/SVG (and a canonical JSON copy) from an existing report.json.
int cmd_report(const Overrides& o) {
    std::ifstream in(o.spec_path);
    if (!in) throw std::runtime_error("cannot open report file: " + o.spec_path);
    fw::ordered_json j = fw::ordered_json::parse(in);
    if (!j.is_object() || j.value("kind", "") != "experiment_report")
        throw std::invalid_argument("report: " + o.spec_path + " is not an experiment report");

    fw::ExperimentSpec spec = fw::ExperimentSpec::from_json(j.at("spec"));
    std::string out_dir = !o.out_dir.empty() ? o.out_dir : spec.outputs;
    Formats f = pick_formats(o);

    fw::NetworkGraph g = fw::build_graph(spec);
    fw::MiningProfile mp = fw::MiningProfile::uniform(g.n, spec.pi_total);
    fw::ExperimentResult res{spec, j.at("spec_hash").get<std::string>(), std::move(g),
                             std::move(mp), fw::RunMode::full};

    const fw::ordered_json& ja = j.at("analysis");
    const fw::ordered_json& jsim = j.at("simulation");
    if (!spec.adversary.selfish) {
        if (!ja.is_null()) {
            fw::HonestAnalysisReport a;
            a.n = res.graph.n;
            a.fork_rate = ja.at("fork_rate").get<double>();
            a.at50 = ja.at("at50").get<double>();
            a.expected_win = ja.at("expected_win").get<std::vector<double>>();
            a.rmg = ja.at("rmg").get<std::vector<double>>();
            res.honest_ana = std::move(a);
        }
        if (!jsim.is_null()) {
            res.mr_sim_mean = jsim.at("mr_mean").get<std::vector<double>>();
            res.rmg_sim_mean = jsim.at("rmg_mean").get<std::vector<double>>();
        }
    } else {
        fw::SelfishCurve curve;
        curve.strategy = spec.adversary.strategy;
        if (!ja.is_null()) {
            for (const auto& p : ja.at("points")) {
                fw::SelfishPoint pt;
                pt.alpha = p.at("alpha").get<double>();
                pt.members = p.at("members").get<int>();
                pt.gamma = p.at("gamma_ana").get<double>();
                pt.revenue_share = p.at("revenue_ana").get<double>();
                pt.rmg = p.at("rmg_ana").get<double>();
                curve.points.push_back(pt);
            }
        } else if (f.csv || f.svg) {
            throw std::invalid_argument(
                "report: selfish report lacks the analysis section needed for csv/svg");
        }
        res.curve = std::move(curve);
        if (!jsim.is_null()) {
            for (const auto& pa : jsim.at("per_alpha")) {
                fw::SelfishAlphaResult ar;
                ar.ana.alpha = pa.at("alpha").get<double>();
                ar.members = pa.at("members").get<std::vector<int>>();
                ar.revenue_share_mean = pa.at("revenue_share_mean").get<double>();
                ar.revenue_share_stderr = pa.at("revenue_share_stderr").get<double>();
                ar.rmg_mean = pa.at("rmg_mean").get<double>();
                ar.rmg_stderr = pa.at("rmg_stderr").get<double>();
                if (!pa.at("gamma_mean").is_null())
                    ar.gamma_mean = pa.at("gamma_mean").get<double>();
                res.alpha_results.push_back(std::move(ar));
            }
        }
    }

    std::vector<std::filesystem::path> written;
    if (f.json) {
        auto p = std::filesystem::path(out_dir) / "report.json";
        fw::write_text_atomic(p, j.dump(2) + "\n");
        written.push_back(p);
    }
    auto more = fw::write_outputs(res, out_dir, false, f.csv, f.svg);
    written.insert(written.end(), more.begin(), more.end());
    for (const auto& p : written) std::cout << p.string() << "\n";
    return written.empty() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fork-rate and mining-revenue analysis of proof-of-work networks"};
    app.require_subcommand(1);

    Overrides o;
    add_common(app.add_subcommand("gen-graph", "generate the spec's graph and write graph.json"),
               o, false);
    add_common(app.add_subcommand("analyze", "analytic model only, no simulation"), o, false);
    add_common(app.add_subcommand("simulate", "simulation only, no analytic model"), o, true);
    add_common(app.add_subcommand("experiment", "analysis + simulation + comparison"), o, true);
    add_common(app.add_subcommand("report", "re-render outputs from an existing report.json"),
               o, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("gen-graph")) return cmd_gen_graph(o);
        if (app.got_subcommand("analyze")) return run_pipeline(o, fw::RunMode::analysis);
        if (app.got_subcommand("simulate")) return run_pipeline(o, fw::RunMode::simulation);
        if (app.got_subcommand("experiment")) return run_pipeline(o, fw::RunMode::full);
        if (app.got_subcommand("report")) return cmd_report(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
