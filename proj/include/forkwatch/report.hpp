#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "forkwatch/graph.hpp"
#include "forkwatch/honest.hpp"
#include "forkwatch/metrics.hpp"
#include "forkwatch/propagation.hpp"
#include "forkwatch/selfish.hpp"
#include "forkwatch/sim.hpp"

namespace forkwatch {

// Shortest decimal string that round-trips a double; keeps CSV/JSON output
// byte-stable across reruns.
inline std::string fmt_double(double v) {
    for (int prec = 1; prec < 17; ++prec) {
        char probe[40];
        std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(probe, "%lf", &back);
        if (back == v) return probe;
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Write-then-rename so readers never observe a truncated file and failed runs
// leave no partial outputs behind.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path dir = path.parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// node, degree, power_share, ew, mr_sim, rmg_ana, rmg_sim — one row per node.
// Analytic or simulated columns may be absent (empty cells) depending on what
// the experiment ran.
inline std::string per_node_csv(const NetworkGraph& g, const MiningProfile& mp,
                                const std::vector<double>* ew, const std::vector<double>* rmg_ana,
                                const std::vector<double>* mr_sim, const std::vector<double>* rmg_sim,
                                const std::string& provenance) {
    std::string out;
    if (!provenance.empty()) out += "# " + provenance + "\n";
    out += "node,degree,power_share,ew,mr_sim,rmg_ana,rmg_sim\n";
    auto cell = [](const std::vector<double>* v, int i) {
        return v ? fmt_double((*v)[i]) : std::string();
    };
    for (int i = 0; i < g.n; ++i) {
        out += std::to_string(i) + "," + std::to_string(g.degree(i)) + "," +
               fmt_double(mp.share(i)) + "," + cell(ew, i) + "," + cell(mr_sim, i) + "," +
               cell(rmg_ana, i) + "," + cell(rmg_sim, i) + "\n";
    }
    return out;
}

// alpha, gamma_ana, revenue_ana, rmg_ana [, gamma_sim, rmg_sim] — one row per
// sweep point. Simulated columns appear when sim vectors are given; entries
// without a measurement stay empty.
inline std::string curve_csv(const SelfishCurve& curve,
                             const std::vector<std::optional<double>>* gamma_sim,
                             const std::vector<std::optional<double>>* rmg_sim,
                             const std::string& provenance) {
    bool with_sim = gamma_sim != nullptr || rmg_sim != nullptr;
    if (gamma_sim && gamma_sim->size() != curve.points.size())
        throw std::invalid_argument("curve_csv: gamma_sim column size mismatch");
    if (rmg_sim && rmg_sim->size() != curve.points.size())
        throw std::invalid_argument("curve_csv: rmg_sim column size mismatch");
    std::string out;
    if (!provenance.empty()) out += "# " + provenance + "\n";
    out += "alpha,gamma_ana,revenue_ana,rmg_ana";
    if (with_sim) out += ",gamma_sim,rmg_sim";
    out += "\n";
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        const SelfishPoint& p = curve.points[i];
        out += fmt_double(p.alpha) + "," + fmt_double(p.gamma) + "," + fmt_double(p.revenue_share) +
               "," + fmt_double(p.rmg);
        if (with_sim) {
            out += ",";
            if (gamma_sim && (*gamma_sim)[i]) out += fmt_double(*(*gamma_sim)[i]);
            out += ",";
            if (rmg_sim && (*rmg_sim)[i]) out += fmt_double(*(*rmg_sim)[i]);
        }
        out += "\n";
    }
    return out;
}

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace detail

struct SvgSeries {
    std::string name;
    std::string color;  // e.g. "#1f6fb2"
    std::vector<double> xs, ys;
};

// Static line chart: axes, one polyline per series, min/max tick labels and a
// small legend. Deliberately plain markup so diffs stay readable.
inline std::string svg_line_chart(const std::vector<SvgSeries>& series, const std::string& title,
                                  const std::string& x_label, const std::string& y_label) {
    if (series.empty()) throw std::invalid_argument("svg_line_chart: need at least one series");
    const double W = 640, H = 400, ML = 70, MR = 20, MT = 40, MB = 50;
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    bool first = true;
    for (const auto& s : series) {
        if (s.xs.size() != s.ys.size() || s.xs.empty())
            throw std::invalid_argument("svg_line_chart: series " + s.name + " malformed");
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            if (first) {
                xmin = xmax = s.xs[i];
                ymin = ymax = s.ys[i];
                first = false;
            }
            xmin = std::min(xmin, s.xs[i]);
            xmax = std::max(xmax, s.xs[i]);
            ymin = std::min(ymin, s.ys[i]);
            ymax = std::max(ymax, s.ys[i]);
        }
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    auto px = [&](double x) { return ML + (x - xmin) / (xmax - xmin) * (W - ML - MR); };
    auto py = [&](double y) { return H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
           "viewBox=\"0 0 640 400\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
    svg += "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + title + "</text>\n";
    svg += "<line x1=\"" + detail::svg_num(ML) + "\" y1=\"" + detail::svg_num(H - MB) + "\" x2=\"" +
           detail::svg_num(W - MR) + "\" y2=\"" + detail::svg_num(H - MB) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + detail::svg_num(ML) + "\" y1=\"" + detail::svg_num(MT) + "\" x2=\"" +
           detail::svg_num(ML) + "\" y2=\"" + detail::svg_num(H - MB) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + detail::svg_num(ML) + "\" y=\"" + detail::svg_num(H - MB + 18) +
           "\" text-anchor=\"middle\">" + fmt_double(xmin) + "</text>\n";
    svg += "<text x=\"" + detail::svg_num(W - MR) + "\" y=\"" + detail::svg_num(H - MB + 18) +
           "\" text-anchor=\"end\">" + fmt_double(xmax) + "</text>\n";
    svg += "<text x=\"" + detail::svg_num(ML - 6) + "\" y=\"" + detail::svg_num(H - MB) +
           "\" text-anchor=\"end\">" + fmt_double(ymin) + "</text>\n";
    svg += "<text x=\"" + detail::svg_num(ML - 6) + "\" y=\"" + detail::svg_num(MT + 4) +
           "\" text-anchor=\"end\">" + fmt_double(ymax) + "</text>\n";
    svg += "<text x=\"320\" y=\"" + detail::svg_num(H - 12) + "\" text-anchor=\"middle\">" +
           x_label + "</text>\n";
    svg += "<text x=\"16\" y=\"200\" text-anchor=\"middle\" transform=\"rotate(-90 16 200)\">" +
           y_label + "</text>\n";
    double ly = MT + 6;
    for (const auto& s : series) {
        svg += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            if (i) svg += " ";
            svg += detail::svg_num(px(s.xs[i])) + "," + detail::svg_num(py(s.ys[i]));
        }
        svg += "\"/>\n";
        svg += "<rect x=\"" + detail::svg_num(W - MR - 150) + "\" y=\"" + detail::svg_num(ly) +
               "\" width=\"12\" height=\"4\" fill=\"" + s.color + "\"/>\n";
        svg += "<text x=\"" + detail::svg_num(W - MR - 132) + "\" y=\"" + detail::svg_num(ly + 6) +
               "\">" + s.name + "</text>\n";
        ly += 16;
    }
    svg += "</svg>\n";
    return svg;
}

inline std::string svg_histogram(const Histogram& h, const std::string& title,
                                 const std::string& x_label) {
    const double W = 640, H = 400, ML = 70, MR = 20, MT = 40, MB = 50;
    std::int64_t peak = 1;
    for (auto c : h.counts) peak = std::max(peak, c);
    int bins = static_cast<int>(h.counts.size());
    double bw = (W - ML - MR) / bins;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
           "viewBox=\"0 0 640 400\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
    svg += "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + title + "</text>\n";
    for (int i = 0; i < bins; ++i) {
        double frac = static_cast<double>(h.counts[i]) / static_cast<double>(peak);
        double bh = frac * (H - MT - MB);
        svg += "<rect x=\"" + detail::svg_num(ML + i * bw) + "\" y=\"" +
               detail::svg_num(H - MB - bh) + "\" width=\"" + detail::svg_num(bw) + "\" height=\"" +
               detail::svg_num(bh) + "\" fill=\"#4a90d9\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
    }
    svg += "<line x1=\"" + detail::svg_num(ML) + "\" y1=\"" + detail::svg_num(H - MB) + "\" x2=\"" +
           detail::svg_num(W - MR) + "\" y2=\"" + detail::svg_num(H - MB) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + detail::svg_num(ML) + "\" y=\"" + detail::svg_num(H - MB + 18) +
           "\" text-anchor=\"middle\">" + fmt_double(h.lo) + "</text>\n";
    svg += "<text x=\"" + detail::svg_num(W - MR) + "\" y=\"" + detail::svg_num(H - MB + 18) +
           "\" text-anchor=\"end\">" + fmt_double(h.hi) + "</text>\n";
    svg += "<text x=\"" + detail::svg_num(ML - 6) + "\" y=\"" + detail::svg_num(MT + 4) +
           "\" text-anchor=\"end\">" + std::to_string(peak) + "</text>\n";
    svg += "<text x=\"320\" y=\"" + detail::svg_num(H - 12) + "\" text-anchor=\"middle\">" +
           x_label + "</text>\n";
    svg += "</svg>\n";
    return svg;
}

}  // namespace forkwatch
