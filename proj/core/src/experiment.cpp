#include "cetsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace cetsim {

namespace {

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

double parse_num(std::string_view tok, int line) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw ConfigError("expected a number, got '" + std::string(tok) + "'", line);
    return v;
}

std::uint64_t parse_u64(std::string_view tok, int line) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw ConfigError("expected an unsigned integer, got '" + std::string(tok) + "'", line);
    return v;
}

bool parse_switch(std::string_view tok, int line) {
    if (tok == "on" || tok == "true" || tok == "1") return true;
    if (tok == "off" || tok == "false" || tok == "0") return false;
    throw ConfigError("expected on/off, got '" + std::string(tok) + "'", line);
}

// "raw_bytes=131072 ratio=0.5 fidelity=0.95"
void parse_codec_value(CodecSpec& codec, std::string_view value, int line) {
    for (std::string_view tok : split_ws(value)) {
        std::size_t eq = tok.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("expected key=value in codec entry", line);
        std::string_view key = tok.substr(0, eq);
        std::string_view val = tok.substr(eq + 1);
        if (key == "raw_bytes") codec.raw_bytes = parse_u64(val, line);
        else if (key == "ratio") codec.compression_ratio = parse_num(val, line);
        else if (key == "fidelity") codec.base_fidelity = parse_num(val, line);
        else throw ConfigError("unknown codec field '" + std::string(key) + "'", line);
    }
    if (codec.compression_ratio <= 0.0 || codec.compression_ratio > 1.0)
        throw ConfigError("codec ratio must be in (0,1]", line);
    if (codec.base_fidelity <= 0.0 || codec.base_fidelity > 1.0)
        throw ConfigError("codec fidelity must be in (0,1]", line);
}

void parse_attack_value(std::vector<AttackSpec>& attacks, AttackKind kind,
                        std::string_view value, int line) {
    AttackSpec spec;
    spec.kind = kind;
    for (std::string_view tok : split_ws(value)) {
        std::size_t eq = tok.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("expected key=value in attack entry", line);
        std::string_view key = tok.substr(0, eq);
        std::string_view val = tok.substr(eq + 1);
        if (key == "prob") spec.probability = parse_num(val, line);
        else if (key == "severity") spec.severity = parse_num(val, line);
        else throw ConfigError("unknown attack field '" + std::string(key) + "'", line);
    }
    if (spec.probability < 0.0 || spec.probability > 1.0)
        throw ConfigError("attack prob must be in [0,1]", line);
    if (spec.severity <= 0.0 || spec.severity > 1.0)
        throw ConfigError("attack severity must be in (0,1]", line);
    std::erase_if(attacks, [&](const AttackSpec& a) { return a.kind == kind; });
    attacks.push_back(spec);
}

CodecSpec& codec_slot(std::vector<CodecSpec>& codecs, Modality m) {
    for (CodecSpec& c : codecs) {
        if (c.modality == m) return c;
    }
    codecs.push_back(CodecSpec{m, 1, 1.0, 1.0});
    return codecs.back();
}

} // namespace

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
    ExperimentConfig cfg;
    enum class Section { None, Topology, Codec, Attack, Experiment } section = Section::None;
    bool variants_set = false;

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
            if (line == "[topology]") section = Section::Topology;
            else if (line == "[codec]") section = Section::Codec;
            else if (line == "[attack]") section = Section::Attack;
            else if (line == "[experiment]") section = Section::Experiment;
            else throw ConfigError("unknown section " + std::string(line), line_no);
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
        std::string key{trim(line.substr(0, eq))};
        std::string_view value = trim(line.substr(eq + 1));

        switch (section) {
        case Section::None:
            throw ConfigError("entry before any [section]", line_no);

        case Section::Topology:
            if (key == "terminals") {
                cfg.terminals.clear();
                for (std::string_view tok : split_ws(value)) {
                    std::size_t colon = tok.find(':');
                    if (colon == std::string_view::npos)
                        throw ConfigError("terminal needs label:modalities, e.g. t1:P+I",
                                          line_no);
                    TerminalSpec spec;
                    spec.label = std::string(tok.substr(0, colon));
                    for (char c : tok.substr(colon + 1)) {
                        if (c == '+') continue;
                        auto m = modality_from_tag(c);
                        if (!m)
                            throw ConfigError(std::string("unknown modality tag '") + c + "'",
                                              line_no);
                        spec.sensors.push_back(*m);
                    }
                    if (spec.sensors.empty())
                        throw ConfigError("terminal " + spec.label + " has no sensors",
                                          line_no);
                    cfg.terminals.push_back(std::move(spec));
                }
            } else if (key == "cloud_uplink_mbps") {
                cfg.links.cloud_uplink_bps = parse_num(value, line_no) * 1e6;
            } else if (key == "cloud_uplink_prop_ms") {
                cfg.links.cloud_uplink_prop_s = parse_num(value, line_no) * 1e-3;
            } else if (key == "edge_local_mbps") {
                cfg.links.edge_local_bps = parse_num(value, line_no) * 1e6;
            } else if (key == "edge_local_prop_ms") {
                cfg.links.edge_local_prop_s = parse_num(value, line_no) * 1e-3;
            } else if (key == "d2d_mbps") {
                cfg.links.d2d_bps = parse_num(value, line_no) * 1e6;
            } else if (key == "d2d_prop_ms") {
                cfg.links.d2d_prop_s = parse_num(value, line_no) * 1e-3;
            } else if (key == "proc_ms") {
                cfg.links.per_hop_processing_s = parse_num(value, line_no) * 1e-3;
            } else {
                throw ConfigError("unknown topology key '" + key + "'", line_no);
            }
            break;

        case Section::Codec:
            if (key == "rfpower") parse_codec_value(codec_slot(cfg.codecs, Modality::RfPower), value, line_no);
            else if (key == "image") parse_codec_value(codec_slot(cfg.codecs, Modality::Image), value, line_no);
            else if (key == "pointcloud") parse_codec_value(codec_slot(cfg.codecs, Modality::PointCloud), value, line_no);
            else if (key == "mmwave") parse_codec_value(codec_slot(cfg.codecs, Modality::MmWave), value, line_no);
            else if (key == "alert_payload_bytes") cfg.alert_payload_bytes = parse_u64(value, line_no);
            else throw ConfigError("unknown codec key '" + key + "'", line_no);
            break;

        case Section::Attack:
            if (key == "semantic_tamper")
                parse_attack_value(cfg.attacks, AttackKind::SemanticTamper, value, line_no);
            else if (key == "malicious_relay")
                parse_attack_value(cfg.attacks, AttackKind::MaliciousRelay, value, line_no);
            else if (key == "cross_modal_mislead")
                parse_attack_value(cfg.attacks, AttackKind::CrossModalMislead, value, line_no);
            else if (key == "watermark_detection")
                cfg.defenses.watermark_detection = parse_num(value, line_no);
            else if (key == "directive_verification")
                cfg.defenses.directive_verification = parse_switch(value, line_no);
            else if (key == "consistency_detection")
                cfg.defenses.consistency_detection = parse_num(value, line_no);
            else if (key == "reputation")
                cfg.defenses.reputation_enabled = parse_switch(value, line_no);
            else
                throw ConfigError("unknown attack key '" + key + "'", line_no);
            break;

        case Section::Experiment:
            if (key == "calibration") {
                cfg.calibration = std::string(value);
            } else if (key == "scenarios") {
                cfg.scenarios.clear();
                for (std::string_view tok : split_ws(value)) {
                    auto s = scenario_from_name(tok);
                    if (!s)
                        throw ConfigError("unknown scenario '" + std::string(tok) + "'",
                                          line_no);
                    cfg.scenarios.push_back(*s);
                }
            } else if (key == "snr_db") {
                cfg.snr_db.clear();
                for (std::string_view tok : split_ws(value))
                    cfg.snr_db.push_back(parse_num(tok, line_no));
            } else if (key == "variants") {
                variants_set = true;
                cfg.variants.clear();
                cfg.auto_select = false;
                if (value == "auto") {
                    cfg.auto_select = true;
                } else if (value == "all") {
                    cfg.variants.assign(ModeVariant::all().begin(), ModeVariant::all().end());
                } else {
                    for (std::string_view tok : split_ws(value)) {
                        auto v = ModeVariant::parse(tok);
                        if (!v)
                            throw ConfigError("unknown variant '" + std::string(tok) + "'",
                                              line_no);
                        cfg.variants.push_back(*v);
                    }
                }
            } else if (key == "rounds_per_point") {
                cfg.rounds_per_point = static_cast<std::uint32_t>(parse_u64(value, line_no));
                if (cfg.rounds_per_point == 0)
                    throw ConfigError("rounds_per_point must be positive", line_no);
            } else if (key == "seed") {
                cfg.seed = parse_u64(value, line_no);
            } else if (key == "budget_ms") {
                cfg.budget_s = parse_num(value, line_no) * 1e-3;
            } else if (key == "min_accuracy") {
                cfg.min_accuracy = parse_num(value, line_no);
            } else {
                throw ConfigError("unknown experiment key '" + key + "'", line_no);
            }
            break;
        }
    }
    if (!variants_set && cfg.variants.empty())
        cfg.variants.assign(ModeVariant::all().begin(), ModeVariant::all().end());
    if (cfg.scenarios.empty()) throw ConfigError("no scenarios configured");
    if (cfg.snr_db.empty()) throw ConfigError("no snr_db grid configured");
    if (!cfg.auto_select && cfg.variants.empty())
        throw ConfigError("no variants configured");
    return cfg;
}

Topology ExperimentConfig::build_topology() const {
    if (terminals.empty()) return Topology::make_default(links);
    Topology topo;
    NodeId cloud = topo.add_node(NodeKind::Cloud, "cloud");
    NodeId edge = topo.add_node(NodeKind::Edge, "e1");
    topo.add_link({edge, cloud, links.cloud_uplink_bps, links.cloud_uplink_prop_s,
                   links.per_hop_processing_s, true, LinkClass::CloudUplink});
    std::vector<NodeId> terms;
    for (const TerminalSpec& t : terminals) {
        NodeId id = topo.add_node(NodeKind::Terminal, t.label, t.sensors);
        topo.add_link({id, edge, links.edge_local_bps, links.edge_local_prop_s,
                       links.per_hop_processing_s, true, LinkClass::EdgeLocal});
        terms.push_back(id);
    }
    for (std::size_t i = 0; i < terms.size(); ++i) {
        for (std::size_t j = i + 1; j < terms.size(); ++j) {
            topo.add_link({terms[i], terms[j], links.d2d_bps, links.d2d_prop_s,
                           links.per_hop_processing_s, true, LinkClass::PeerD2D});
        }
    }
    topo.validate();
    return topo;
}

CalibrationTable ExperimentConfig::load_calibration() const {
    if (calibration == "builtin") return CalibrationTable::builtin_default();
    return CalibrationTable::load(calibration);
}

std::string ExperimentConfig::resolved_text(const CalibrationTable& table) const {
    std::string s;
    auto kv = [&](std::string_view k, const std::string& v) {
        s += std::string(k) + " = " + v + "\n";
    };
    s += "# run manifest: fully resolved experiment parameters\n";
    s += "# calibration source: " + table.source() + "\n";
    s += "# calibration content hash: " + table.content_hash() + "\n";
    s += "\n[topology]\n";
    std::string terms;
    Topology topo = build_topology();
    for (const Node& n : topo.nodes()) {
        if (n.kind != NodeKind::Terminal) continue;
        if (!terms.empty()) terms += ' ';
        terms += n.label + ":";
        bool first = true;
        for (Modality m : n.sensors) {
            if (!first) terms += '+';
            terms += modality_tag(m);
            first = false;
        }
    }
    kv("terminals", terms);
    kv("cloud_uplink_mbps", format_double(links.cloud_uplink_bps / 1e6));
    kv("cloud_uplink_prop_ms", format_double(links.cloud_uplink_prop_s * 1e3));
    kv("edge_local_mbps", format_double(links.edge_local_bps / 1e6));
    kv("edge_local_prop_ms", format_double(links.edge_local_prop_s * 1e3));
    kv("d2d_mbps", format_double(links.d2d_bps / 1e6));
    kv("d2d_prop_ms", format_double(links.d2d_prop_s * 1e3));
    kv("proc_ms", format_double(links.per_hop_processing_s * 1e3));

    s += "\n[codec]\n";
    static constexpr std::pair<Modality, const char*> names[] = {
        {Modality::RfPower, "rfpower"},
        {Modality::Image, "image"},
        {Modality::PointCloud, "pointcloud"},
        {Modality::MmWave, "mmwave"},
    };
    for (auto [m, name] : names) {
        const CodecSpec& c = codec_for(codecs, m);
        kv(name, "raw_bytes=" + std::to_string(c.raw_bytes) +
                     " ratio=" + format_double(c.compression_ratio) +
                     " fidelity=" + format_double(c.base_fidelity));
    }
    kv("alert_payload_bytes", std::to_string(alert_payload_bytes));

    s += "\n[attack]\n";
    static constexpr std::pair<AttackKind, const char*> attack_names[] = {
        {AttackKind::SemanticTamper, "semantic_tamper"},
        {AttackKind::MaliciousRelay, "malicious_relay"},
        {AttackKind::CrossModalMislead, "cross_modal_mislead"},
    };
    for (auto [kind, name] : attack_names) {
        double prob = 0.0, severity = 1.0;
        for (const AttackSpec& a : attacks) {
            if (a.kind == kind) {
                prob = a.probability;
                severity = a.severity;
            }
        }
        kv(name, "prob=" + format_double(prob) + " severity=" + format_double(severity));
    }
    kv("watermark_detection", format_double(defenses.watermark_detection));
    kv("directive_verification", defenses.directive_verification ? "on" : "off");
    kv("consistency_detection", format_double(defenses.consistency_detection));
    kv("reputation", defenses.reputation_enabled ? "on" : "off");

    s += "\n[experiment]\n";
    kv("calibration", calibration);
    std::string scen;
    for (Scenario sc : scenarios) {
        if (!scen.empty()) scen += ' ';
        scen += std::string(scenario_name(sc));
    }
    kv("scenarios", scen);
    std::string snrs;
    for (double v : snr_db) {
        if (!snrs.empty()) snrs += ' ';
        snrs += format_double(v);
    }
    kv("snr_db", snrs);
    if (auto_select) {
        kv("variants", "auto");
    } else {
        std::string vs;
        for (const ModeVariant& v : variants) {
            if (!vs.empty()) vs += ' ';
            vs += std::string(v.name());
        }
        kv("variants", vs);
    }
    kv("rounds_per_point", std::to_string(rounds_per_point));
    kv("seed", std::to_string(seed));
    kv("budget_ms", format_double(budget_s * 1e3));
    kv("min_accuracy", format_double(min_accuracy));
    return s;
}

namespace {

struct SweepPoint {
    Scenario scenario;
    double snr_db;
    std::optional<ModeVariant> variant; // nullopt -> controller-driven
};

std::string point_label(const SweepPoint& p) {
    std::string label = std::string(scenario_name(p.scenario)) + "/" +
                        format_double(p.snr_db) + "/" +
                        (p.variant ? std::string(p.variant->name()) : "auto");
    return label;
}

unsigned worker_count(unsigned requested, std::size_t tasks) {
    unsigned n = requested;
    if (n == 0) {
        if (const char* env = std::getenv("CETSIM_THREADS")) {
            n = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
        }
    }
    if (n == 0) n = 1;
    return static_cast<unsigned>(std::min<std::size_t>(n, tasks ? tasks : 1));
}

} // namespace

std::size_t run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                           const SimulateOptions& opts) {
    namespace fs = std::filesystem;
    const std::uint64_t seed = opts.seed_override.value_or(cfg.seed);
    const CalibrationTable table = cfg.load_calibration();
    const Topology topo = cfg.build_topology();

    std::vector<SweepPoint> points;
    for (Scenario s : cfg.scenarios) {
        for (double snr : cfg.snr_db) {
            if (cfg.auto_select) {
                points.push_back({s, snr, std::nullopt});
            } else {
                for (const ModeVariant& v : cfg.variants) points.push_back({s, snr, v});
            }
        }
    }

    // One independent block of rows per point; points may run on a worker
    // pool, rows are emitted in canonical point order regardless.
    std::vector<std::string> blocks(points.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> rows{0};

    auto run_point = [&](std::size_t idx) {
        const SweepPoint& p = points[idx];
        std::string block;
        RoundConfig round_cfg;
        round_cfg.scenario = p.scenario;
        round_cfg.snr_db = p.snr_db;
        round_cfg.codecs = cfg.codecs;
        round_cfg.attacks = cfg.attacks;
        round_cfg.defenses = cfg.defenses;
        round_cfg.alert_payload_bytes = cfg.alert_payload_bytes;

        ReputationState reputation;
        const std::string label = point_label(p);

        for (std::uint32_t round = 0; round < cfg.rounds_per_point; ++round) {
            RngStream rng(label + "/" + std::to_string(round), seed);

            std::optional<ModeVariant> variant = p.variant;
            if (!variant) {
                const NodeId viewpoint = topo.terminals().front();
                SelectionRequest req;
                req.latency_budget_s = cfg.budget_s;
                req.min_accuracy = cfg.min_accuracy;
                req.scenario = p.scenario;
                req.snr_db = p.snr_db;
                req.local_sensors = topo.node(viewpoint).sensors;
                req.link_state = LinkState::from_topology(topo, viewpoint);
                auto sel = select_mode(req, topo, table, cfg.codecs);
                if (!sel) continue; // NoFeasibleMode: skip the round
                variant = sel->variant;
            }

            RoundResult r;
            try {
                r = run_round(*variant, topo, table, round_cfg, rng,
                              cfg.defenses.reputation_enabled ? &reputation : nullptr);
            } catch (const ModeInfeasibleError&) {
                continue;
            }

            double accuracy = r.accuracy;
            if (opts.sample_outcomes) {
                RngStream outcome_rng(label + "/" + std::to_string(round) + "/outcome", seed);
                accuracy = outcome_rng.bernoulli(r.accuracy) ? 1.0 : 0.0;
            }

            const ComputeCost& cost = table.compute_cost(*variant);
            block += std::string(mode_name(variant->mode())) + "," +
                     std::string(variant->name()) + "," +
                     std::string(scenario_name(p.scenario)) + "," + format_double(p.snr_db) +
                     "," + std::to_string(seed) + "," + std::to_string(round) + "," +
                     format_double(accuracy) + "," + format_double(r.inference_s * 1e3) + "," +
                     format_double(r.transmission_s * 1e3) + "," +
                     format_double(r.total_s * 1e3) + "," + format_double(cost.flops_g) + "," +
                     format_double(cost.memory_mb) + "," + std::to_string(r.bytes_tx) + "," +
                     std::to_string(r.attacks_hit) + "," + std::to_string(r.defenses_hit) +
                     "\n";
            rows.fetch_add(1, std::memory_order_relaxed);
        }
        blocks[idx] = std::move(block);
    };

    const unsigned workers = worker_count(opts.threads, points.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < points.size(); ++i) run_point(i);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= points.size()) return;
                    run_point(i);
                }
            });
        }
        for (std::thread& t : pool) t.join();
    }

    fs::create_directories(out_dir);
    {
        std::ofstream csv(fs::path(out_dir) / "results.csv", std::ios::binary);
        if (!csv) throw Error("cannot write results.csv in " + out_dir);
        csv << kResultsHeader << "\n";
        for (const std::string& b : blocks) csv << b;
    }
    {
        ExperimentConfig resolved = cfg;
        resolved.seed = seed;
        std::ofstream manifest(fs::path(out_dir) / "run_manifest", std::ios::binary);
        if (!manifest) throw Error("cannot write run_manifest in " + out_dir);
        manifest << resolved.resolved_text(table);
    }
    return rows.load();
}

} // namespace cetsim
