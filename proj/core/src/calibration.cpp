#include "cetsim/calibration.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cetsim {

namespace {

// Kept byte-identical with core/data/table2_fig4_default; a test pins the
// equality via the content hash.
constexpr const char kDefaultCalibrationText[] =
    R"(# Default calibration table for the CET simulator.
#
# [costs] holds the per-variant compute cost per sample:
#   <variant> = <flops_g> <memory_mb> <inference_s>
#
# [quality] holds the accuracy-curve parameters:
#   acc(v, s, snr) = c + (A(v,s) - c) * sigmoid((snr - midpoint_db)/slope_db)
# with chance level c = 1/num_beams.
#
# A(GFM, Daytime) is solved so that acc(GFM, Daytime, 25 dB) = 0.769 with
# c = 1/64, midpoint 5 dB, slope 5 dB. All other peak accuracies are
# calibration defaults chosen to satisfy the ordering constraints checked at
# load time; they are not measured values.

[costs]
PIM(P+I)   = 4.15e+00 2.40e+01 7.27e-03
PIM(P+C)   = 9.45e+00 1.05e+02 3.22e-02
PIM(P+M)   = 7.30e+00 1.89e+01 5.51e-03
CRM(P+I+C) = 9.45e+00 1.07e+02 3.11e-02
CRM(P+I+M) = 7.31e+00 2.46e+01 1.33e-02
CRM(P+C+M) = 8.46e+00 1.06e+02 3.42e-02
GFM        = 1.26e+01 1.07e+02 3.82e-02

[quality]
num_beams = 64
midpoint_db = 5
slope_db = 5

A GFM Daytime        = 0.78279854
A CRM(P+I+C) Daytime = 0.74
A CRM(P+I+M) Daytime = 0.75
A CRM(P+C+M) Daytime = 0.72
A PIM(P+I) Daytime   = 0.66
A PIM(P+C) Daytime   = 0.63
A PIM(P+M) Daytime   = 0.65

A GFM Nighttime        = 0.76
A CRM(P+I+C) Nighttime = 0.68
A CRM(P+I+M) Nighttime = 0.73
A CRM(P+C+M) Nighttime = 0.71
A PIM(P+I) Nighttime   = 0.52
A PIM(P+C) Nighttime   = 0.62
A PIM(P+M) Nighttime   = 0.64
)";

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

double parse_number(std::string_view tok, int line) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw CalibrationError("expected a number, got '" + std::string(tok) + "'", line);
    return v;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

bool is_subset(std::span<const Modality> small, std::span<const Modality> big) {
    return std::all_of(small.begin(), small.end(), [&](Modality m) {
        return std::find(big.begin(), big.end(), m) != big.end();
    });
}

} // namespace

CalibrationTable CalibrationTable::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CalibrationError("cannot open calibration file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

CalibrationTable CalibrationTable::parse(std::string_view text, std::string source_name) {
    CalibrationTable table = parse_unchecked(text, std::move(source_name));
    table.validate();
    return table;
}

CalibrationTable CalibrationTable::parse_unchecked(std::string_view text,
                                                   std::string source_name) {
    CalibrationTable table;
    table.source_ = std::move(source_name);
    table.hash_ = fnv1a_hex(text);

    enum class Section { None, Costs, Quality } section = Section::None;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = trim(text.substr(pos, eol - pos));
        pos = eol + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;

        if (line.front() == '[') {
            if (line == "[costs]") section = Section::Costs;
            else if (line == "[quality]") section = Section::Quality;
            else throw CalibrationError("unknown section " + std::string(line), line_no);
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw CalibrationError("expected 'key = value'", line_no);
        std::string_view key = trim(line.substr(0, eq));
        std::string_view value = trim(line.substr(eq + 1));

        switch (section) {
        case Section::None:
            throw CalibrationError("entry before any [section]", line_no);
        case Section::Costs: {
            auto variant = ModeVariant::parse(key);
            if (!variant)
                throw CalibrationError("unknown variant '" + std::string(key) + "'", line_no);
            auto toks = split_ws(value);
            if (toks.size() != 3)
                throw CalibrationError("cost entry needs flops_g memory_mb inference_s",
                                       line_no);
            ComputeCost c{parse_number(toks[0], line_no), parse_number(toks[1], line_no),
                          parse_number(toks[2], line_no)};
            table.costs_[variant->id()] = c;
            break;
        }
        case Section::Quality: {
            auto key_toks = split_ws(key);
            if (key == "num_beams") {
                table.quality_.num_beams =
                    static_cast<std::uint32_t>(parse_number(value, line_no));
            } else if (key == "midpoint_db") {
                table.quality_.midpoint_db = parse_number(value, line_no);
            } else if (key == "slope_db") {
                table.quality_.slope_db = parse_number(value, line_no);
            } else if (key_toks.size() == 3 && key_toks[0] == "A") {
                auto variant = ModeVariant::parse(key_toks[1]);
                auto scen = scenario_from_name(key_toks[2]);
                if (!variant)
                    throw CalibrationError("unknown variant '" + std::string(key_toks[1]) + "'",
                                           line_no);
                if (!scen)
                    throw CalibrationError("unknown scenario '" + std::string(key_toks[2]) + "'",
                                           line_no);
                table.quality_.peak_accuracy[{variant->id(), *scen}] =
                    parse_number(value, line_no);
            } else {
                throw CalibrationError("unknown quality key '" + std::string(key) + "'",
                                       line_no);
            }
            break;
        }
        }
    }
    return table;
}

const CalibrationTable& CalibrationTable::builtin_default() {
    static const CalibrationTable table =
        parse(kDefaultCalibrationText, "builtin:table2_fig4_default");
    return table;
}

const ComputeCost& CalibrationTable::compute_cost(ModeVariant v) const {
    auto it = costs_.find(v.id());
    if (it == costs_.end())
        throw MissingVariantError("no compute cost for " + std::string(v.name()), 0,
                                  "variants-present");
    return it->second;
}

double CalibrationTable::peak_accuracy(ModeVariant v, Scenario s) const {
    auto it = quality_.peak_accuracy.find({v.id(), s});
    if (it == quality_.peak_accuracy.end())
        throw MissingVariantError("no peak accuracy for " + std::string(v.name()) + " / " +
                                      std::string(scenario_name(s)),
                                  0, "variants-present");
    return it->second;
}

std::vector<ConstraintReport> CalibrationTable::check_constraints() const {
    std::vector<ConstraintReport> reports;
    auto add = [&](std::string name, bool ok, std::string detail = {}) {
        reports.push_back({std::move(name), ok, std::move(detail)});
    };

    bool all_present = true;
    std::string missing;
    for (const auto& v : ModeVariant::all()) {
        if (!costs_.contains(v.id())) {
            all_present = false;
            missing += std::string(v.name()) + " (cost) ";
        }
        for (Scenario s : kAllScenarios) {
            if (!quality_.peak_accuracy.contains({v.id(), s})) {
                all_present = false;
                missing += std::string(v.name()) + "/" + std::string(scenario_name(s)) + " ";
            }
        }
    }
    add("variants-present", all_present, missing);
    if (!all_present) return reports; // later checks would throw on lookups

    bool costs_ok = true;
    for (const auto& [id, c] : costs_) {
        if (!(c.flops_g > 0.0 && std::isfinite(c.flops_g)) ||
            !(c.memory_mb > 0.0 && std::isfinite(c.memory_mb)) ||
            !(c.inference_s > 0.0 && std::isfinite(c.inference_s)))
            costs_ok = false;
    }
    add("costs-positive", costs_ok);

    bool ranges_ok = quality_.num_beams >= 2 && quality_.slope_db > 0.0;
    for (const auto& [key, a] : quality_.peak_accuracy) {
        if (!(a > 0.0 && a < 1.0)) ranges_ok = false;
    }
    add("quality-ranges", ranges_ok);

    const auto& variants = ModeVariant::all();
    bool subset_ok = true;
    std::string subset_detail;
    for (Scenario s : kAllScenarios) {
        for (const auto& big : variants) {
            for (const auto& small : variants) {
                if (big == small) continue;
                if (!is_subset(small.modalities(), big.modalities())) continue;
                if (peak_accuracy(big, s) < peak_accuracy(small, s)) {
                    subset_ok = false;
                    subset_detail += std::string(big.name()) + " < " +
                                     std::string(small.name()) + " at " +
                                     std::string(scenario_name(s)) + " ";
                }
            }
        }
    }
    add("subset-monotonicity", subset_ok, subset_detail);

    double min_a = 1.0;
    for (const auto& [key, a] : quality_.peak_accuracy) min_a = std::min(min_a, a);
    add("chance-below-peaks", quality_.chance() < min_a);

    const ModeVariant gfm = ModeVariant::from_id(ModeVariant::Id::Gfm);
    const ModeVariant pim_pi = ModeVariant::from_id(ModeVariant::Id::PimPI);
    const ModeVariant crm_pim = ModeVariant::from_id(ModeVariant::Id::CrmPIM);

    const double anchor = quality_.chance() +
                          (peak_accuracy(gfm, Scenario::Daytime) - quality_.chance()) *
                              logistic((25.0 - quality_.midpoint_db) / quality_.slope_db);
    add("daytime-anchor", std::abs(anchor - 0.769) <= 0.001,
        "acc(GFM, Daytime, 25 dB) = " + format_double(anchor));

    add("nighttime-vision-penalty",
        peak_accuracy(pim_pi, Scenario::Nighttime) < peak_accuracy(pim_pi, Scenario::Daytime));

    add("crm-near-gfm-nighttime",
        peak_accuracy(crm_pim, Scenario::Nighttime) >=
            peak_accuracy(gfm, Scenario::Nighttime) - 0.05);

    return reports;
}

void CalibrationTable::validate() const {
    for (const ConstraintReport& r : check_constraints()) {
        if (!r.passed) {
            const std::string msg = "constraint violated: " + r.name +
                                    (r.detail.empty() ? "" : " (" + r.detail + ")");
            if (r.name == "variants-present") throw MissingVariantError(msg, 0, r.name);
            throw CalibrationError(msg, 0, r.name);
        }
    }
}

double sensing_accuracy(ModeVariant v, Scenario s, double snr_db, const CalibrationTable& t) {
    const double c = t.quality().chance();
    const double a = t.peak_accuracy(v, s);
    return c + (a - c) * logistic((snr_db - t.quality().midpoint_db) / t.quality().slope_db);
}

double effective_accuracy(double base, std::span<const SemanticFeature> accepted_features,
                          double chance) {
    if (accepted_features.empty()) return chance; // nothing left to fuse
    double product = 1.0;
    for (const SemanticFeature& f : accepted_features) product *= f.fidelity;
    return chance + (base - chance) * product;
}

Modality crm_guided_modality(ModeVariant v) {
    if (v.has_modality(Modality::MmWave)) return Modality::MmWave;
    return Modality::PointCloud; // every CRM variant carries C or M
}

Modality crm_cue_modality(ModeVariant v) {
    if (v.has_modality(Modality::Image)) return Modality::Image;
    return Modality::PointCloud;
}

LatencyBreakdown total_latency(ModeVariant v, const Topology& topo, const CalibrationTable& t,
                               std::span<const CodecSpec> codecs,
                               std::uint64_t alert_payload_bytes) {
    LatencyBreakdown out;
    out.inference_s = t.compute_cost(v).inference_s;

    switch (v.mode()) {
    case Mode::GFM: {
        std::uint64_t aggregate = 0;
        NodeId dummy{0};
        for (Modality m : kAllModalities)
            aggregate += encode(m, codec_for(codecs, m), dummy).payload_bytes;
        NoRouteError last("no terminal with a cloud route");
        for (NodeId term : topo.terminals()) {
            try {
                auto path = route(term, topo.cloud(), Mode::GFM, topo);
                out.transmission_s = path_latency(aggregate, path);
                out.total_s = out.inference_s + out.transmission_s;
                return out;
            } catch (const NoRouteError& e) {
                last = e;
            }
        }
        throw last;
    }
    case Mode::CRM: {
        const Modality cue = crm_cue_modality(v);
        const Modality guided = crm_guided_modality(v);
        NodeId target{}, source{};
        bool have_target = false, have_source = false;
        for (const Node& n : topo.nodes()) {
            if (n.kind != NodeKind::Terminal) continue;
            if (!have_target &&
                std::find(n.sensors.begin(), n.sensors.end(), guided) != n.sensors.end()) {
                target = n.id;
                have_target = true;
            }
        }
        for (const Node& n : topo.nodes()) {
            if (n.kind != NodeKind::Terminal || (have_target && n.id == target)) continue;
            if (!have_source &&
                std::find(n.sensors.begin(), n.sensors.end(), cue) != n.sensors.end()) {
                source = n.id;
                have_source = true;
            }
        }
        if (!have_target || !have_source)
            throw NoRouteError("no terminal pair for CRM roles of " + std::string(v.name()));
        auto path = route(source, target, Mode::CRM, topo); // [EdgeLocal, EdgeLocal]
        const std::uint64_t cue_payload =
            encode(cue, codec_for(codecs, cue), source).payload_bytes;
        out.transmission_s = transmit_latency(cue_payload, path[0]) +
                             transmit_latency(alert_payload_bytes, path[1]);
        out.total_s = out.inference_s + out.transmission_s;
        return out;
    }
    case Mode::PIM: {
        for (NodeId term : topo.terminals()) {
            for (NodeId peer : topo.d2d_peers(term)) {
                std::vector<Modality> pool = topo.node(term).sensors;
                const auto& ps = topo.node(peer).sensors;
                pool.insert(pool.end(), ps.begin(), ps.end());
                bool covered = std::all_of(
                    v.modalities().begin(), v.modalities().end(), [&](Modality m) {
                        return std::find(pool.begin(), pool.end(), m) != pool.end();
                    });
                if (!covered) continue;
                auto path = route(term, peer, Mode::PIM, topo);
                out.transmission_s = path_latency(alert_payload_bytes, path);
                out.total_s = out.inference_s + out.transmission_s;
                return out;
            }
        }
        throw NoRouteError("no peer pair covers " + std::string(v.name()));
    }
    }
    throw Error("total_latency: unknown mode");
}

LatencyBreakdown total_latency(ModeVariant v, const Topology& topo, const CalibrationTable& t) {
    const auto codecs = default_codecs();
    return total_latency(v, topo, t, codecs);
}

} // namespace cetsim
