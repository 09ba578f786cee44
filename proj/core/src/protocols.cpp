#include "cetsim/protocols.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

namespace cetsim {

namespace {

constexpr double kRunForever = std::numeric_limits<double>::infinity();

std::string format_exact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const AttackSpec* find_attack(const std::vector<AttackSpec>& attacks, AttackKind kind) {
    for (const AttackSpec& a : attacks) {
        if (a.kind == kind) return &a;
    }
    return nullptr;
}

const Node* first_terminal_with(const Topology& topo, Modality m, NodeId exclude,
                                bool use_exclude) {
    for (const Node& n : topo.nodes()) {
        if (n.kind != NodeKind::Terminal) continue;
        if (use_exclude && n.id == exclude) continue;
        if (std::find(n.sensors.begin(), n.sensors.end(), m) != n.sensors.end()) return &n;
    }
    return nullptr;
}

std::string transfer_detail(std::string_view msg, const LinkSpec& link, std::uint64_t bytes) {
    std::string d{msg};
    d += ";link=";
    d += link_class_name(link.link_class);
    d += ";bytes=";
    d += std::to_string(bytes);
    return d;
}

} // namespace

std::string Directive::serialize() const {
    std::string s = "DIR v1|issuer=";
    s += std::to_string(issuer.value);
    s += "|mod=";
    s += modality_tag(target_modality);
    s += "|action=";
    s += action;
    s += "|x=";
    s += format_exact(x);
    s += "|y=";
    s += format_exact(y);
    s += "|sig=";
    s += signature_valid ? '1' : '0';
    return s;
}

std::optional<Directive> Directive::parse(std::string_view wire) {
    if (!wire.starts_with("DIR v1|")) return std::nullopt;
    wire.remove_prefix(7);
    Directive d;
    bool have[6] = {};
    while (!wire.empty()) {
        std::size_t bar = wire.find('|');
        std::string_view field = wire.substr(0, bar);
        wire = (bar == std::string_view::npos) ? std::string_view{} : wire.substr(bar + 1);
        std::size_t eq = field.find('=');
        if (eq == std::string_view::npos) return std::nullopt;
        std::string_view key = field.substr(0, eq);
        std::string_view val = field.substr(eq + 1);
        auto number = [&](double& out) {
            auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), out);
            return ec == std::errc{} && p == val.data() + val.size();
        };
        if (key == "issuer") {
            std::uint32_t id = 0;
            auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), id);
            if (ec != std::errc{} || p != val.data() + val.size()) return std::nullopt;
            d.issuer = NodeId{id};
            have[0] = true;
        } else if (key == "mod") {
            if (val.size() != 1) return std::nullopt;
            auto m = modality_from_tag(val[0]);
            if (!m) return std::nullopt;
            d.target_modality = *m;
            have[1] = true;
        } else if (key == "action") {
            d.action = std::string(val);
            have[2] = true;
        } else if (key == "x") {
            if (!number(d.x)) return std::nullopt;
            have[3] = true;
        } else if (key == "y") {
            if (!number(d.y)) return std::nullopt;
            have[4] = true;
        } else if (key == "sig") {
            if (val != "0" && val != "1") return std::nullopt;
            d.signature_valid = (val == "1");
            have[5] = true;
        } else {
            return std::nullopt;
        }
    }
    for (bool h : have) {
        if (!h) return std::nullopt;
    }
    if (!std::isfinite(d.x) || !std::isfinite(d.y)) return std::nullopt;
    return d;
}

double ReputationState::weight(NodeId peer) const {
    auto it = weights.find(peer);
    return it == weights.end() ? 1.0 : it->second;
}

void ReputationState::update(NodeId peer, bool corroborated) {
    double w = weight(peer);
    w = corroborated ? std::min(1.0, w + reward * (1.0 - w)) : w * decay;
    weights[peer] = std::clamp(w, 0.0, 1.0);
}

ReputationState reputation_update(ReputationState state, NodeId peer, bool corroborated) {
    state.update(peer, corroborated);
    return state;
}

std::string_view tool_name(Tool t) {
    switch (t) {
    case Tool::Encode: return "Encode";
    case Tool::Transmit: return "Transmit";
    case Tool::AdjustBeam: return "AdjustBeam";
    case Tool::RaiseAlert: return "RaiseAlert";
    case Tool::VerifyDirective: return "VerifyDirective";
    case Tool::NoOp: return "NoOp";
    }
    return "?";
}

Agent::Agent(NodeId node, std::map<std::string, std::string> knowledge)
    : node_(node), knowledge_(std::move(knowledge)) {}

const std::string* Agent::fact(const std::string& key) const {
    auto it = knowledge_.find(key);
    return it == knowledge_.end() ? nullptr : &it->second;
}

void Agent::observe(double time_s, std::string observation) {
    memory_.emplace_back(time_s, std::move(observation));
    while (memory_.size() > kMemoryCapacity) memory_.pop_front();
}

void Agent::add_rule(std::string percept, Tool tool) { rules_[std::move(percept)] = tool; }

Tool Agent::react(const std::string& percept) const {
    auto it = rules_.find(percept);
    return it == rules_.end() ? Tool::NoOp : it->second;
}

std::map<std::string, std::string> default_zone_facts() {
    return {
        {"zone.t1", "12 34"},
        {"zone.t2", "56 78"},
        {"zone.t3", "90 12"},
    };
}

Directive crm_translate(const SemanticFeature& feature, const Agent& relay,
                        const Topology& topo, Modality guided) {
    if (!feature.watermark_valid)
        throw UntrustedFeatureError("crm_translate: feature watermark invalid");
    Directive d;
    d.issuer = relay.node();
    d.target_modality = guided;
    d.action = "focus";
    const std::string* zone = relay.fact("zone." + topo.node(feature.origin).label);
    if (zone) {
        std::sscanf(zone->c_str(), "%lf %lf", &d.x, &d.y);
    }
    d.signature_valid = true;
    return d;
}

bool pim_consistency_check(const Message& alert, std::string_view /*local_observation*/,
                           double detection_prob, RngStream& rng) {
    // Ground truth rides in the wire body; the physics check catches a
    // falsified alert with the configured probability.
    const bool truthful = alert.body.find("truth=1") != std::string::npos;
    if (truthful) return true;
    return !rng.bernoulli(detection_prob);
}

RoundResult run_gfm_round(const Topology& topo, const CalibrationTable& table,
                          const RoundConfig& cfg, RngStream& rng) {
    const ModeVariant gfm = ModeVariant::from_id(ModeVariant::Id::Gfm);
    RoundResult res;
    res.variant = gfm;
    Simulator sim;

    // Canonical modality -> uploading terminal assignment.
    struct Upload {
        NodeId terminal;
        std::vector<SemanticFeature> features;
        std::uint64_t bytes = 0;
    };
    std::map<std::uint32_t, Upload> uploads;
    for (Modality m : kAllModalities) {
        const Node* owner = first_terminal_with(topo, m, NodeId{}, false);
        if (!owner) continue;
        SemanticFeature f = encode(m, codec_for(cfg.codecs, m), owner->id);
        auto& up = uploads[owner->id.value];
        up.terminal = owner->id;
        up.features.push_back(f);
    }
    if (uploads.empty()) throw ModeInfeasibleError("gfm: no terminal features to upload");

    const NodeId cloud = topo.cloud();
    const AttackSpec* tamper = find_attack(cfg.attacks, AttackKind::SemanticTamper);

    double edge_gather_time = 0.0;
    std::uint64_t aggregate_bytes = 0;
    NodeId edge{};
    bool have_edge = false;
    std::vector<SemanticFeature> features;
    try {
        for (auto& [tid, up] : uploads) {
            for (SemanticFeature& f : up.features) {
                if (tamper && inject_attack(f, *tamper, rng)) {
                    ++res.attacks_hit;
                    sim.schedule(0.0, EventKind::AttackInjected, up.terminal,
                                 "attack=SemanticTamper;mod=" + std::string(1, modality_tag(f.modality)));
                }
                up.bytes += f.payload_bytes;
                features.push_back(f);
            }
            auto path = route(up.terminal, cloud, Mode::GFM, topo);
            const LinkSpec& local = path[0];
            // All default terminals share one edge; a multi-edge topology
            // gathers at the edge of the first terminal's route.
            NodeId this_edge = (local.a == up.terminal) ? local.b : local.a;
            if (!have_edge) {
                edge = this_edge;
                have_edge = true;
            }
            const double t_arrive = transmit_latency(up.bytes, local);
            sim.schedule(0.0, EventKind::TransmitStart, up.terminal,
                         transfer_detail("feature_upload", local, up.bytes));
            sim.schedule(t_arrive, EventKind::Delivered, this_edge,
                         transfer_detail("feature_upload", local, up.bytes));
            res.bytes_tx += up.bytes;
            edge_gather_time = std::max(edge_gather_time, t_arrive);
            aggregate_bytes += up.bytes;
        }

        const LinkSpec* uplink = topo.find_link(edge, cloud, LinkClass::CloudUplink);
        if (!uplink || !uplink->up) throw NoRouteError("cloud uplink down");
        const double t_cloud = edge_gather_time + transmit_latency(aggregate_bytes, *uplink);
        sim.schedule(edge_gather_time, EventKind::TransmitStart, edge,
                     transfer_detail("aggregated_upload", *uplink, aggregate_bytes));
        sim.schedule(t_cloud, EventKind::Delivered, cloud,
                     transfer_detail("aggregated_upload", *uplink, aggregate_bytes));
        res.bytes_tx += aggregate_bytes;

        std::vector<SemanticFeature> accepted;
        for (const SemanticFeature& f : features) {
            if (verify_watermark(f, cfg.defenses.watermark_detection, rng)) {
                accepted.push_back(f);
            } else {
                ++res.defenses_hit;
                sim.schedule(t_cloud, EventKind::DefenseTriggered, cloud,
                             "defense=watermark;mod=" +
                                 std::string(1, modality_tag(f.modality)));
            }
        }

        res.inference_s = table.compute_cost(gfm).inference_s;
        res.transmission_s = t_cloud;
        res.total_s = t_cloud + res.inference_s;
        const double base = sensing_accuracy(gfm, cfg.scenario, cfg.snr_db, table);
        res.accuracy = effective_accuracy(base, accepted, table.quality().chance());

        sim.schedule(res.total_s, EventKind::ComputeDone, cloud,
                     "model=GFM;samples=" + std::to_string(accepted.size()));
        sim.schedule(res.total_s, EventKind::Decision, cloud,
                     "fusion=GFM;accuracy=" + format_double(res.accuracy));
    } catch (const NoRouteError& e) {
        throw ModeInfeasibleError(std::string("gfm round infeasible: ") + e.what());
    } catch (const LinkDownError& e) {
        throw ModeInfeasibleError(std::string("gfm round infeasible: ") + e.what());
    }

    res.trace = sim.run_until(kRunForever);
    return res;
}

RoundResult run_crm_round(ModeVariant variant, const Topology& topo,
                          const CalibrationTable& table, const RoundConfig& cfg,
                          RngStream& rng) {
    if (variant.mode() != Mode::CRM) throw Error("run_crm_round: not a CRM variant");
    RoundResult res;
    res.variant = variant;
    Simulator sim;

    const Modality cue = crm_cue_modality(variant);
    const Modality guided = crm_guided_modality(variant);
    const Node* target = first_terminal_with(topo, guided, NodeId{}, false);
    if (!target) throw ModeInfeasibleError("crm: no terminal carries the guided modality");
    const Node* source = first_terminal_with(topo, cue, target->id, true);
    if (!source) throw ModeInfeasibleError("crm: no cue terminal distinct from the target");

    std::vector<LinkSpec> path;
    try {
        path = route(source->id, target->id, Mode::CRM, topo);
    } catch (const NoRouteError& e) {
        throw ModeInfeasibleError(std::string("crm round infeasible: ") + e.what());
    }
    const NodeId edge = (path[0].a == source->id) ? path[0].b : path[0].a;

    Agent relay(edge, default_zone_facts());
    relay.add_rule("feature_delivered", Tool::Transmit);
    Agent target_agent(target->id);
    target_agent.add_rule("directive_delivered", Tool::VerifyDirective);

    SemanticFeature cue_feature = encode(cue, codec_for(cfg.codecs, cue), source->id);
    const AttackSpec* tamper = find_attack(cfg.attacks, AttackKind::SemanticTamper);
    if (tamper && inject_attack(cue_feature, *tamper, rng)) {
        ++res.attacks_hit;
        sim.schedule(0.0, EventKind::AttackInjected, source->id,
                     "attack=SemanticTamper;mod=" + std::string(1, modality_tag(cue)));
    }

    const double t_edge = transmit_latency(cue_feature.payload_bytes, path[0]);
    sim.schedule(0.0, EventKind::TransmitStart, source->id,
                 transfer_detail("cue_feature", path[0], cue_feature.payload_bytes));
    sim.schedule(t_edge, EventKind::Delivered, edge,
                 transfer_detail("cue_feature", path[0], cue_feature.payload_bytes));
    res.bytes_tx += cue_feature.payload_bytes;

    relay.observe(t_edge, "feature_delivered");

    bool directive_rejected = false;
    bool directive_corrupted = false;
    double t_target = t_edge;

    if (!verify_watermark(cue_feature, cfg.defenses.watermark_detection, rng)) {
        ++res.defenses_hit;
        sim.schedule(t_edge, EventKind::DefenseTriggered, edge, "defense=watermark;mod=cue");
        directive_rejected = true;
    } else {
        Directive directive = crm_translate(cue_feature, relay, topo, guided);
        Message msg;
        msg.kind = MessageKind::Directive;
        msg.src = edge;
        msg.dst = target->id;
        msg.body = directive.serialize();
        msg.payload_bytes = std::max<std::uint64_t>(cfg.alert_payload_bytes, msg.body.size());

        const AttackSpec* relay_attack = find_attack(cfg.attacks, AttackKind::MaliciousRelay);
        if (relay_attack && inject_attack(msg, *relay_attack, rng)) {
            ++res.attacks_hit;
            directive_corrupted = true;
            sim.schedule(t_edge, EventKind::AttackInjected, edge, "attack=MaliciousRelay");
        }

        t_target = t_edge + transmit_latency(msg.payload_bytes, path[1]);
        sim.schedule(t_edge, EventKind::TransmitStart, edge,
                     transfer_detail("directive", path[1], msg.payload_bytes));
        sim.schedule(t_target, EventKind::Delivered, target->id,
                     transfer_detail("directive", path[1], msg.payload_bytes));
        res.bytes_tx += msg.payload_bytes;
        target_agent.observe(t_target, "directive_delivered");

        auto received = Directive::parse(msg.body);
        const bool signature_ok = received && received->signature_valid;
        if (cfg.defenses.directive_verification &&
            target_agent.react("directive_delivered") == Tool::VerifyDirective &&
            !signature_ok) {
            ++res.defenses_hit;
            directive_rejected = true;
            sim.schedule(t_target, EventKind::DefenseTriggered, target->id,
                         "defense=directive_verification");
        } else {
            sim.schedule(t_target, EventKind::Decision, target->id,
                         "tool=AdjustBeam;x=" + format_double(received ? received->x : 0.0) +
                             ";y=" + format_double(received ? received->y : 0.0));
        }
    }

    res.transmission_s = t_target;
    const double chance = table.quality().chance();

    if (directive_rejected) {
        // Graceful degradation: the source keeps sensing on its own best
        // dual-modality configuration.
        const ModeVariant* best = nullptr;
        double best_acc = -1.0;
        for (const ModeVariant& p : ModeVariant::all()) {
            if (p.mode() != Mode::PIM) continue;
            bool local = std::all_of(
                p.modalities().begin(), p.modalities().end(), [&](Modality m) {
                    return std::find(source->sensors.begin(), source->sensors.end(), m) !=
                           source->sensors.end();
                });
            if (!local) continue;
            const double a = sensing_accuracy(p, cfg.scenario, cfg.snr_db, table);
            if (a > best_acc) {
                best_acc = a;
                best = &p;
            }
        }
        if (!best) throw ModeInfeasibleError("crm fallback: source has no local PIM variant");
        std::vector<SemanticFeature> local_feats;
        for (Modality m : best->modalities())
            local_feats.push_back(encode(m, codec_for(cfg.codecs, m), source->id));
        res.inference_s = table.compute_cost(*best).inference_s;
        res.accuracy = effective_accuracy(best_acc, local_feats, chance);
        res.total_s = res.transmission_s + res.inference_s;
        sim.schedule(res.total_s, EventKind::Decision, source->id,
                     "fallback=" + std::string(best->name()) +
                         ";accuracy=" + format_double(res.accuracy));
    } else {
        std::vector<SemanticFeature> feats;
        for (Modality m : variant.modalities()) {
            if (m == cue) {
                SemanticFeature f = cue_feature;
                if (directive_corrupted) f.fidelity *= // misdirected beam wastes the cue
                    find_attack(cfg.attacks, AttackKind::MaliciousRelay)->severity;
                feats.push_back(f);
            } else {
                const Node* owner =
                    (std::find(target->sensors.begin(), target->sensors.end(), m) !=
                     target->sensors.end())
                        ? target
                        : first_terminal_with(topo, m, NodeId{}, false);
                if (!owner) continue;
                feats.push_back(encode(m, codec_for(cfg.codecs, m), owner->id));
            }
        }
        res.inference_s = table.compute_cost(variant).inference_s;
        const double base = sensing_accuracy(variant, cfg.scenario, cfg.snr_db, table);
        res.accuracy = effective_accuracy(base, feats, chance);
        res.total_s = res.transmission_s + res.inference_s;
        sim.schedule(res.total_s, EventKind::ComputeDone, target->id,
                     "model=" + std::string(variant.name()));
        sim.schedule(res.total_s, EventKind::Decision, target->id,
                     "fusion=" + std::string(variant.name()) +
                         ";accuracy=" + format_double(res.accuracy));
    }

    res.trace = sim.run_until(kRunForever);
    return res;
}

RoundResult run_pim_round(ModeVariant variant, const Topology& topo,
                          const CalibrationTable& table, const RoundConfig& cfg, RngStream& rng,
                          ReputationState* reputation) {
    if (variant.mode() != Mode::PIM) throw Error("run_pim_round: not a PIM variant");
    RoundResult res;
    res.variant = variant;
    Simulator sim;

    // Primary/partner: first terminal pair whose joint sensors cover the
    // variant and that share an up D2D link.
    const Node* primary = nullptr;
    NodeId partner{};
    for (NodeId term : topo.terminals()) {
        for (NodeId peer : topo.d2d_peers(term)) {
            std::vector<Modality> pool = topo.node(term).sensors;
            const auto& ps = topo.node(peer).sensors;
            pool.insert(pool.end(), ps.begin(), ps.end());
            bool covered =
                std::all_of(variant.modalities().begin(), variant.modalities().end(),
                            [&](Modality m) {
                                return std::find(pool.begin(), pool.end(), m) != pool.end();
                            });
            if (covered) {
                primary = &topo.node(term);
                partner = peer;
                break;
            }
        }
        if (primary) break;
    }
    if (!primary) throw ModeInfeasibleError("pim: no linked peer pair covers the variant");

    const LinkSpec* d2d = topo.find_link(primary->id, partner, LinkClass::PeerD2D);

    Agent primary_agent(primary->id);
    primary_agent.add_rule("alert_delivered", Tool::RaiseAlert);

    // The partner reports the modality it contributes (or corroborates the
    // primary's own reading when everything is local).
    Modality partner_mod = variant.modalities()[0];
    bool partner_contributes = false;
    for (Modality m : variant.modalities()) {
        if (std::find(primary->sensors.begin(), primary->sensors.end(), m) ==
            primary->sensors.end()) {
            partner_mod = m;
            partner_contributes = true;
            break;
        }
    }

    Message alert;
    alert.kind = MessageKind::PeerAlert;
    alert.src = partner;
    alert.dst = primary->id;
    alert.body = "ALERT v1|src=" + std::to_string(partner.value) + "|mod=" +
                 std::string(1, modality_tag(partner_mod)) + "|event=object_detected|truth=1";
    alert.payload_bytes = std::max<std::uint64_t>(cfg.alert_payload_bytes, alert.body.size());

    const AttackSpec* mislead = find_attack(cfg.attacks, AttackKind::CrossModalMislead);
    bool falsified = false;
    if (mislead && inject_attack(alert, *mislead, rng)) {
        ++res.attacks_hit;
        falsified = true;
        sim.schedule(0.0, EventKind::AttackInjected, partner, "attack=CrossModalMislead");
    }

    const double t_alert = transmit_latency(alert.payload_bytes, *d2d);
    sim.schedule(0.0, EventKind::TransmitStart, partner,
                 transfer_detail("peer_alert", *d2d, alert.payload_bytes));
    sim.schedule(t_alert, EventKind::Delivered, primary->id,
                 transfer_detail("peer_alert", *d2d, alert.payload_bytes));
    res.bytes_tx += alert.payload_bytes;
    primary_agent.observe(t_alert, "alert_delivered");

    bool alert_excluded = false;
    bool mislead_accepted = false;
    if (reputation && !reputation->trusted(partner)) {
        alert_excluded = true;
        sim.schedule(t_alert, EventKind::DefenseTriggered, primary->id,
                     "defense=reputation;peer=" + std::to_string(partner.value));
        ++res.defenses_hit;
    } else if (!pim_consistency_check(alert, "local", cfg.defenses.consistency_detection,
                                      rng)) {
        alert_excluded = true;
        ++res.defenses_hit;
        sim.schedule(t_alert, EventKind::DefenseTriggered, primary->id,
                     "defense=consistency;peer=" + std::to_string(partner.value));
        if (reputation) reputation->update(partner, false);
    } else {
        if (falsified) mislead_accepted = true;
        if (reputation) reputation->update(partner, true);
    }

    std::vector<SemanticFeature> feats;
    for (Modality m : variant.modalities()) {
        const bool local = std::find(primary->sensors.begin(), primary->sensors.end(), m) !=
                           primary->sensors.end();
        const NodeId origin = local ? primary->id : partner;
        if (!local && alert_excluded) continue; // borrowed reading was rejected
        SemanticFeature f = encode(m, codec_for(cfg.codecs, m), origin);
        if (!local && mislead_accepted) f.fidelity *= mislead->severity;
        feats.push_back(f);
    }

    const double chance = table.quality().chance();
    const double base = sensing_accuracy(variant, cfg.scenario, cfg.snr_db, table);
    res.accuracy = effective_accuracy(base, feats, chance);
    if (mislead_accepted && !partner_contributes) {
        // The phantom report corrupts the fusion even when every modality is
        // local to the primary.
        res.accuracy = chance + (res.accuracy - chance) * mislead->severity;
    }

    res.inference_s = table.compute_cost(variant).inference_s;
    res.transmission_s = t_alert;
    res.total_s = res.inference_s + res.transmission_s;

    sim.schedule(res.total_s, EventKind::ComputeDone, primary->id,
                 "model=" + std::string(variant.name()));
    sim.schedule(res.total_s, EventKind::Decision, primary->id,
                 "fusion=" + std::string(variant.name()) +
                     ";accuracy=" + format_double(res.accuracy));

    res.trace = sim.run_until(kRunForever);
    return res;
}

RoundResult run_round(ModeVariant variant, const Topology& topo, const CalibrationTable& table,
                      const RoundConfig& cfg, RngStream& rng, ReputationState* reputation) {
    switch (variant.mode()) {
    case Mode::GFM: return run_gfm_round(topo, table, cfg, rng);
    case Mode::CRM: return run_crm_round(variant, topo, table, cfg, rng);
    case Mode::PIM: return run_pim_round(variant, topo, table, cfg, rng, reputation);
    }
    throw Error("run_round: unknown mode");
}

} // namespace cetsim
