#include "cetsim/report.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "cetsim/engine.hpp"

namespace cetsim {

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

double field_num(std::string_view tok, std::size_t line_no) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw SchemaError("results.csv line " + std::to_string(line_no) +
                          ": expected a number, got '" + std::string(tok) + "'");
    return v;
}

std::uint64_t field_u64(std::string_view tok, std::size_t line_no) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw SchemaError("results.csv line " + std::to_string(line_no) +
                          ": expected an integer, got '" + std::string(tok) + "'");
    return v;
}

// Fixed palette, one entry per canonical variant index.
constexpr const char* kSeriesColors[ModeVariant::kCount] = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
};

} // namespace

std::vector<ResultRow> read_results_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty results file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kResultsHeader)
        throw SchemaError("results.csv header mismatch; expected '" +
                          std::string(kResultsHeader) + "'");

    std::vector<ResultRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = split_csv(line);
        if (f.size() != 15)
            throw SchemaError("results.csv line " + std::to_string(line_no) +
                              ": expected 15 fields, got " + std::to_string(f.size()));
        ResultRow r;
        auto variant = ModeVariant::parse(f[1]);
        if (!variant)
            throw SchemaError("results.csv line " + std::to_string(line_no) +
                              ": unknown variant '" + std::string(f[1]) + "'");
        r.variant = *variant;
        if (f[0] != mode_name(r.variant.mode()))
            throw SchemaError("results.csv line " + std::to_string(line_no) +
                              ": mode/variant mismatch");
        auto scen = scenario_from_name(f[2]);
        if (!scen)
            throw SchemaError("results.csv line " + std::to_string(line_no) +
                              ": unknown scenario '" + std::string(f[2]) + "'");
        r.scenario = *scen;
        r.snr_db = field_num(f[3], line_no);
        r.seed = field_u64(f[4], line_no);
        r.round = static_cast<std::uint32_t>(field_u64(f[5], line_no));
        r.accuracy = field_num(f[6], line_no);
        r.inference_ms = field_num(f[7], line_no);
        r.transmission_ms = field_num(f[8], line_no);
        r.total_ms = field_num(f[9], line_no);
        r.flops_g = field_num(f[10], line_no);
        r.memory_mb = field_num(f[11], line_no);
        r.bytes_tx = field_u64(f[12], line_no);
        r.attacks_hit = static_cast<int>(field_u64(f[13], line_no));
        r.defenses_hit = static_cast<int>(field_u64(f[14], line_no));
        rows.push_back(r);
    }
    return rows;
}

std::string render_accuracy_svg(const std::vector<ResultRow>& rows, Scenario scenario) {
    // Mean accuracy per (variant, snr).
    std::map<std::pair<ModeVariant::Id, double>, std::pair<double, std::size_t>> agg;
    double snr_min = 1e300, snr_max = -1e300;
    for (const ResultRow& r : rows) {
        if (r.scenario != scenario) continue;
        auto& acc = agg[{r.variant.id(), r.snr_db}];
        acc.first += r.accuracy;
        acc.second += 1;
        snr_min = std::min(snr_min, r.snr_db);
        snr_max = std::max(snr_max, r.snr_db);
    }
    if (agg.empty()) throw SchemaError("no rows for scenario " +
                                       std::string(scenario_name(scenario)));
    if (snr_max == snr_min) {
        snr_min -= 1.0;
        snr_max += 1.0;
    }

    constexpr double width = 820, height = 560;
    constexpr double left = 70, right = 790, top = 40, bottom = 500;
    auto sx = [&](double snr) {
        return left + (snr - snr_min) / (snr_max - snr_min) * (right - left);
    };
    auto sy = [&](double acc) { return bottom - acc * (bottom - top); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(width) +
           "\" height=\"" + format_double(height) + "\" viewBox=\"0 0 " +
           format_double(width) + " " + format_double(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
           "Beam prediction accuracy vs SNR (" +
           std::string(scenario_name(scenario)) + ")</text>\n";
    // Axes.
    svg += "<line x1=\"" + format_double(left) + "\" y1=\"" + format_double(bottom) +
           "\" x2=\"" + format_double(right) + "\" y2=\"" + format_double(bottom) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + format_double(left) + "\" y1=\"" + format_double(top) + "\" x2=\"" +
           format_double(left) + "\" y2=\"" + format_double(bottom) +
           "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 10; i += 2) {
        const double acc = i / 10.0;
        svg += "<text x=\"" + format_double(left - 8) + "\" y=\"" +
               format_double(sy(acc) + 4) + "\" text-anchor=\"end\" font-size=\"11\">" +
               format_double(acc) + "</text>\n";
    }
    svg += "<text x=\"430\" y=\"540\" text-anchor=\"middle\" font-size=\"13\">SNR (dB)"
           "</text>\n";
    svg += "<text x=\"18\" y=\"270\" text-anchor=\"middle\" font-size=\"13\" "
           "transform=\"rotate(-90 18 270)\">Top-1 accuracy</text>\n";

    std::size_t series = 0;
    for (const ModeVariant& v : ModeVariant::all()) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& [key, sum_count] : agg) {
            if (key.first != v.id()) continue;
            pts.emplace_back(key.second, sum_count.first / sum_count.second);
        }
        if (pts.empty()) continue;
        std::sort(pts.begin(), pts.end());
        const char* color = kSeriesColors[static_cast<std::size_t>(v.id())];
        std::string poly;
        for (const auto& [snr, acc] : pts) {
            if (!poly.empty()) poly += ' ';
            poly += format_double(sx(snr)) + "," + format_double(sy(acc));
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"2\" points=\"" + poly + "\"/>\n";
        // x-axis tick labels come from the first series' grid
        if (series == 0) {
            for (const auto& [snr, acc] : pts) {
                svg += "<text x=\"" + format_double(sx(snr)) + "\" y=\"" +
                       format_double(bottom + 16) +
                       "\" text-anchor=\"middle\" font-size=\"11\">" + format_double(snr) +
                       "</text>\n";
            }
        }
        const double ly = top + 18.0 * static_cast<double>(series);
        svg += "<rect x=\"640\" y=\"" + format_double(ly - 9) +
               "\" width=\"12\" height=\"12\" fill=\"" + color + "\"/>\n";
        svg += "<text x=\"658\" y=\"" + format_double(ly + 1) + "\" font-size=\"12\">" +
               std::string(v.name()) + "</text>\n";
        ++series;
    }
    svg += "</svg>\n";
    return svg;
}

std::string render_complexity_csv(const std::vector<ResultRow>& rows) {
    struct Acc {
        double flops = 0, mem = 0, lat = 0;
        std::size_t n = 0;
    };
    std::map<ModeVariant::Id, Acc> agg;
    for (const ResultRow& r : rows) {
        Acc& a = agg[r.variant.id()];
        a.flops += r.flops_g;
        a.mem += r.memory_mb;
        a.lat += r.inference_ms;
        ++a.n;
    }
    std::string out = "variant,flops_g,memory_mb,inference_latency_ms\n";
    for (const ModeVariant& v : ModeVariant::all()) {
        auto it = agg.find(v.id());
        if (it == agg.end()) continue;
        const Acc& a = it->second;
        const double n = static_cast<double>(a.n);
        out += std::string(v.name()) + "," + format_double(a.flops / n) + "," +
               format_double(a.mem / n) + "," + format_double(a.lat / n) + "\n";
    }
    return out;
}

std::vector<std::string> write_plots(const std::vector<ResultRow>& rows,
                                     const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<std::string> written;
    for (Scenario s : kAllScenarios) {
        bool present = std::any_of(rows.begin(), rows.end(),
                                   [&](const ResultRow& r) { return r.scenario == s; });
        if (!present) continue;
        const std::string name = "accuracy_vs_snr_" + std::string(scenario_name(s)) + ".svg";
        std::ofstream out(fs::path(out_dir) / name, std::ios::binary);
        if (!out) throw Error("cannot write " + name);
        out << render_accuracy_svg(rows, s);
        written.push_back(name);
    }
    {
        std::ofstream out(fs::path(out_dir) / "complexity_table.csv", std::ios::binary);
        if (!out) throw Error("cannot write complexity_table.csv");
        out << render_complexity_csv(rows);
        written.push_back("complexity_table.csv");
    }
    return written;
}

} // namespace cetsim
