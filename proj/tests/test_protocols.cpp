#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "cetsim/protocols.hpp"

using namespace cetsim;

namespace {
ModeVariant v(const char* name) {
    auto parsed = ModeVariant::parse(name);
    REQUIRE(parsed.has_value());
    return *parsed;
}

bool trace_has(const Trace& t, EventKind kind, const std::string& needle) {
    for (const Event& e : t.events)
        if (e.kind == kind && e.detail.find(needle) != std::string::npos) return true;
    return false;
}

int count_kind(const Trace& t, EventKind kind) {
    int n = 0;
    for (const Event& e : t.events)
        if (e.kind == kind) ++n;
    return n;
}
} // namespace

TEST_CASE("directive wire format is exact") {
    Directive d;
    d.issuer = NodeId{4};
    d.target_modality = Modality::MmWave;
    d.x = 12.0;
    d.y = 34.0;
    CHECK(d.serialize() == "DIR v1|issuer=4|mod=M|action=focus|x=12|y=34|sig=1");
    d.signature_valid = false;
    CHECK(d.serialize().ends_with("|sig=0"));
}

TEST_CASE("directive serialization round-trips, including awkward reals") {
    RngStream rng("protocols/directive", 17);
    for (int i = 0; i < 200; ++i) {
        Directive d;
        d.issuer = NodeId{static_cast<std::uint32_t>(rng.next_u64() % 1000)};
        d.target_modality = kAllModalities[rng.next_u64() % 4];
        d.x = (rng.next_uniform() - 0.5) * std::pow(10.0, double(rng.next_u64() % 7) - 3.0);
        d.y = (rng.next_uniform() - 0.5) * 1e3;
        d.signature_valid = rng.bernoulli(0.5);
        auto back = Directive::parse(d.serialize());
        REQUIRE(back.has_value());
        CHECK(back->issuer == d.issuer);
        CHECK(back->target_modality == d.target_modality);
        CHECK(back->action == d.action);
        CHECK(back->x == d.x); // %.17g preserves the double exactly
        CHECK(back->y == d.y);
        CHECK(back->signature_valid == d.signature_valid);
    }
}

TEST_CASE("malformed directives parse to nothing") {
    CHECK(!Directive::parse("").has_value());
    CHECK(!Directive::parse("DIR v2|issuer=1").has_value());
    CHECK(!Directive::parse("DIR v1|issuer=1|mod=M|action=focus|x=1|y=2").has_value());
    CHECK(!Directive::parse("DIR v1|issuer=1|mod=Q|action=focus|x=1|y=2|sig=1").has_value());
    CHECK(!Directive::parse("DIR v1|issuer=1|mod=M|action=focus|x=nan|y=2|sig=1").has_value());
    CHECK(!Directive::parse("DIR v1|issuer=1|mod=M|action=focus|x=1|y=2|sig=2").has_value());
}

TEST_CASE("reputation rewards corroboration and decays deceit") {
    ReputationState rep;
    NodeId peer{9};
    CHECK(rep.weight(peer) == 1.0); // optimistic prior
    rep.update(peer, false);
    CHECK(rep.weight(peer) == doctest::Approx(0.8));
    for (int i = 0; i < 4; ++i) rep.update(peer, false);
    CHECK(rep.weight(peer) == doctest::Approx(0.32768)); // 0.8^5
    CHECK(!rep.trusted(peer));
    // Recovery pulls toward 1 but stays clamped.
    for (int i = 0; i < 200; ++i) rep.update(peer, true);
    CHECK(rep.weight(peer) <= 1.0);
    CHECK(rep.trusted(peer));

    ReputationState copy = reputation_update(rep, NodeId{10}, false);
    CHECK(copy.weight(NodeId{10}) == doctest::Approx(0.8));
    CHECK(rep.weight(NodeId{10}) == 1.0); // value-semantics helper
}

TEST_CASE("agent memory is bounded and rules are deterministic") {
    Agent a(NodeId{1}, {{"zone.t1", "12 34"}});
    REQUIRE(a.fact("zone.t1") != nullptr);
    CHECK(*a.fact("zone.t1") == "12 34");
    CHECK(a.fact("zone.t9") == nullptr);
    a.add_rule("directive_delivered", Tool::VerifyDirective);
    CHECK(a.react("directive_delivered") == Tool::VerifyDirective);
    CHECK(a.react("unknown percept") == Tool::NoOp);
    for (int i = 0; i < 300; ++i) a.observe(i * 0.1, "obs" + std::to_string(i));
    CHECK(a.memory().size() == Agent::kMemoryCapacity);
    CHECK(a.memory().back().second == "obs299");
}

TEST_CASE("crm_translate maps the cue's zone fact into the directive") {
    Topology topo = Topology::make_default();
    NodeId edge = topo.edge_nodes().front();
    Agent relay(edge, default_zone_facts());
    SemanticFeature cue;
    cue.modality = Modality::Image;
    cue.origin = topo.find_node("t1")->id;
    Directive d = crm_translate(cue, relay, topo, Modality::MmWave);
    CHECK(d.issuer == edge);
    CHECK(d.target_modality == Modality::MmWave);
    CHECK(d.x == 12.0);
    CHECK(d.y == 34.0);
    CHECK(d.signature_valid);
    // Same input, same wire bytes.
    CHECK(d.serialize() == crm_translate(cue, relay, topo, Modality::MmWave).serialize());

    SemanticFeature bad = cue;
    bad.watermark_valid = false;
    CHECK_THROWS_AS(crm_translate(bad, relay, topo, Modality::MmWave), UntrustedFeatureError);
}

TEST_CASE("consistency check passes truth and catches lies probabilistically") {
    RngStream rng("protocols/consistency", 2);
    Message truthful;
    truthful.body = "ALERT v1|src=3|mod=M|event=object_detected|truth=1";
    for (int i = 0; i < 100; ++i)
        CHECK(pim_consistency_check(truthful, "local", 0.9, rng));

    Message lie = truthful;
    lie.body = "ALERT v1|src=3|mod=M|event=object_detected|truth=0";
    for (int i = 0; i < 100; ++i)
        CHECK(!pim_consistency_check(lie, "local", 1.0, rng));

    int caught = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i)
        if (!pim_consistency_check(lie, "local", 0.8, rng)) ++caught;
    CHECK(std::abs(caught / double(n) - 0.8) < 0.02);
}

TEST_CASE("a clean centralized round matches the analytic budget") {
    Topology topo = Topology::make_default();
    const CalibrationTable& table = CalibrationTable::builtin_default();
    RoundConfig cfg; // Daytime, 25 dB, no attacks
    RngStream rng("round/gfm-clean", 1);
    RoundResult r = run_gfm_round(topo, table, cfg, rng);

    double base = sensing_accuracy(v("GFM"), Scenario::Daytime, 25.0, table);
    std::vector<SemanticFeature> four(4);
    for (auto& f : four) f.fidelity = 0.95;
    CHECK(r.accuracy ==
          doctest::Approx(effective_accuracy(base, four, table.quality().chance())));
    CHECK(r.accuracy == doctest::Approx(0.629).epsilon(2e-3));
    CHECK(r.inference_s == 38.2e-3);
    CHECK(r.transmission_s > 0.300);
    CHECK(r.total_s > 0.340);
    CHECK(r.attacks_hit == 0);
    CHECK(r.defenses_hit == 0);
    CHECK(r.bytes_tx >= 2 * 2'005'402); // local hops plus the aggregated uplink copy
    CHECK(trace_has(r.trace, EventKind::Delivered, "aggregated_upload"));
    CHECK(trace_has(r.trace, EventKind::Decision, "fusion=GFM"));
    for (std::size_t i = 1; i < r.trace.events.size(); ++i)
        CHECK(r.trace.events[i - 1].time_s <= r.trace.events[i].time_s);
}

TEST_CASE("a downed uplink makes the centralized round infeasible") {
    Topology topo = Topology::make_default();
    topo.set_class_up(LinkClass::CloudUplink, false);
    RoundConfig cfg;
    RngStream rng("round/gfm-down", 1);
    CHECK_THROWS_AS(run_gfm_round(topo, CalibrationTable::builtin_default(), cfg, rng),
                    ModeInfeasibleError);
}

TEST_CASE("certain tampering with certain detection strips every feature") {
    Topology topo = Topology::make_default();
    const CalibrationTable& table = CalibrationTable::builtin_default();
    RoundConfig clean_cfg;
    RngStream rng_clean("round/gfm-attack-base", 5);
    RoundResult clean = run_gfm_round(topo, table, clean_cfg, rng_clean);

    RoundConfig cfg;
    cfg.attacks.push_back({AttackKind::SemanticTamper, 1.0, 0.5});
    cfg.defenses.watermark_detection = 1.0;
    RngStream rng("round/gfm-attack", 5);
    RoundResult r = run_gfm_round(topo, table, cfg, rng);
    CHECK(r.attacks_hit == 4);
    CHECK(r.defenses_hit == 4);
    CHECK(r.accuracy == doctest::Approx(table.quality().chance()));
    CHECK(r.accuracy < clean.accuracy);
    CHECK(count_kind(r.trace, EventKind::AttackInjected) == 4);
    CHECK(count_kind(r.trace, EventKind::DefenseTriggered) == 4);
}

TEST_CASE("a clean guided round stays within reach of full fusion") {
    Topology topo = Topology::make_default();
    const CalibrationTable& table = CalibrationTable::builtin_default();
    RoundConfig cfg;
    cfg.scenario = Scenario::Nighttime;
    RngStream rng_g("round/crm-vs-gfm/g", 3);
    RngStream rng_c("round/crm-vs-gfm/c", 3);
    RoundResult gfm = run_gfm_round(topo, table, cfg, rng_g);
    RoundResult crm = run_crm_round(v("CRM(P+I+M)"), topo, table, cfg, rng_c);
    // Fewer fused features soften GFM's model-level edge, but the round-level
    // gap stays within the 0.05 band either way.
    CHECK(std::abs(gfm.accuracy - crm.accuracy) <= 0.05);
    CHECK(crm.transmission_s < 0.1 * gfm.transmission_s);
    CHECK(crm.total_s < gfm.total_s);
    CHECK(trace_has(crm.trace, EventKind::Delivered, "directive"));
    CHECK(trace_has(crm.trace, EventKind::Decision, "tool=AdjustBeam;x=12;y=34"));
}

TEST_CASE("a corrupted directive is caught and degrades gracefully") {
    Topology topo = Topology::make_default();
    const CalibrationTable& table = CalibrationTable::builtin_default();
    RoundConfig cfg;
    cfg.attacks.push_back({AttackKind::MaliciousRelay, 1.0, 0.5});
    RngStream rng("round/crm-relay", 7);
    RoundResult r = run_crm_round(v("CRM(P+I+M)"), topo, table, cfg, rng);
    CHECK(r.attacks_hit == 1);
    CHECK(r.defenses_hit == 1);
    CHECK(trace_has(r.trace, EventKind::DefenseTriggered, "directive_verification"));
    CHECK(trace_has(r.trace, EventKind::Decision, "fallback=PIM(P+I)"));
    // Fallback accuracy equals the cue source's own dual-modality fusion.
    std::vector<SemanticFeature> two(2);
    for (auto& f : two) f.fidelity = 0.95;
    double expect = effective_accuracy(
        sensing_accuracy(v("PIM(P+I)"), Scenario::Daytime, 25.0, table), two,
        table.quality().chance());
    CHECK(r.accuracy == doctest::Approx(expect));
}

TEST_CASE("executing a corrupted directive is worse than rejecting it") {
    Topology topo = Topology::make_default();
    const CalibrationTable& table = CalibrationTable::builtin_default();
    RoundConfig attacked;
    attacked.attacks.push_back({AttackKind::MaliciousRelay, 1.0, 0.5});
    RoundConfig executed = attacked;
    executed.defenses.directive_verification = false;

    RngStream rng_a("round/crm-verify", 9);
    RngStream rng_b("round/crm-noverify", 9);
    RoundResult guarded = run_crm_round(v("CRM(P+I+M)"), topo, table, attacked, rng_a);
    RoundResult exposed = run_crm_round(v("CRM(P+I+M)"), topo, table, executed, rng_b);
    CHECK(exposed.defenses_hit == 0);
    CHECK(exposed.accuracy < guarded.accuracy);

    RoundConfig clean;
    RngStream rng_c("round/crm-clean", 9);
    RoundResult baseline = run_crm_round(v("CRM(P+I+M)"), topo, table, clean, rng_c);
    CHECK(exposed.accuracy < baseline.accuracy);
}

TEST_CASE("a clean peer round fits the reflex budget") {
    Topology topo = Topology::make_default();
    const CalibrationTable& table = CalibrationTable::builtin_default();
    RoundConfig cfg;
    RngStream rng("round/pim-clean", 4);
    RoundResult r = run_pim_round(v("PIM(P+M)"), topo, table, cfg, rng);
    CHECK(r.total_s >= 0.005);
    CHECK(r.total_s <= 0.010);
    CHECK(r.bytes_tx == 2048);
    CHECK(r.attacks_hit == 0);
    CHECK(r.defenses_hit == 0);
    std::vector<SemanticFeature> two(2);
    for (auto& f : two) f.fidelity = 0.95;
    CHECK(r.accuracy == doctest::Approx(effective_accuracy(
                            sensing_accuracy(v("PIM(P+M)"), Scenario::Daytime, 25.0, table),
                            two, table.quality().chance())));
    CHECK(trace_has(r.trace, EventKind::Delivered, "peer_alert;link=PeerD2D"));
}

TEST_CASE("a falsified alert is rejected, excluded, and remembered") {
    Topology topo = Topology::make_default();
    const CalibrationTable& table = CalibrationTable::builtin_default();
    RoundConfig cfg;
    cfg.attacks.push_back({AttackKind::CrossModalMislead, 1.0, 0.5});
    cfg.defenses.consistency_detection = 1.0;
    ReputationState rep;
    RngStream rng("round/pim-mislead", 6);

    NodeId partner = topo.find_node("t3")->id;
    RoundResult r = run_pim_round(v("PIM(P+M)"), topo, table, cfg, rng, &rep);
    CHECK(r.attacks_hit == 1);
    CHECK(r.defenses_hit == 1);
    CHECK(trace_has(r.trace, EventKind::DefenseTriggered, "defense=consistency"));
    CHECK(rep.weight(partner) == doctest::Approx(0.8)); // one decay step
    // Borrowed radar reading excluded: only the local feature remains.
    std::vector<SemanticFeature> one(1);
    one[0].fidelity = 0.95;
    CHECK(r.accuracy == doctest::Approx(effective_accuracy(
                            sensing_accuracy(v("PIM(P+M)"), Scenario::Daytime, 25.0, table),
                            one, table.quality().chance())));

    // Repeated deceit drops the peer below the trust floor; the alert is then
    // ignored before any physics check runs.
    for (int i = 0; i < 4; ++i) rep.update(partner, false);
    CHECK(!rep.trusted(partner));
    RoundResult ignored = run_pim_round(v("PIM(P+M)"), topo, table, cfg, rng, &rep);
    CHECK(trace_has(ignored.trace, EventKind::DefenseTriggered, "defense=reputation"));
}

TEST_CASE("an accepted falsified alert costs accuracy") {
    Topology topo = Topology::make_default();
    const CalibrationTable& table = CalibrationTable::builtin_default();
    RoundConfig cfg;
    cfg.attacks.push_back({AttackKind::CrossModalMislead, 1.0, 0.5});
    cfg.defenses.consistency_detection = 0.0; // defense disabled
    RngStream rng("round/pim-accepted", 8);
    RoundResult r = run_pim_round(v("PIM(P+M)"), topo, table, cfg, rng);
    CHECK(r.defenses_hit == 0);

    RoundConfig clean;
    RngStream rng_c("round/pim-accepted-clean", 8);
    RoundResult base = run_pim_round(v("PIM(P+M)"), topo, table, clean, rng_c);
    CHECK(r.accuracy < base.accuracy);
}

TEST_CASE("no live peer pair means no peer round") {
    Topology topo = Topology::make_default();
    topo.set_class_up(LinkClass::PeerD2D, false);
    RoundConfig cfg;
    RngStream rng("round/pim-isolated", 2);
    CHECK_THROWS_AS(
        run_pim_round(v("PIM(P+M)"), topo, CalibrationTable::builtin_default(), cfg, rng),
        ModeInfeasibleError);
}

TEST_CASE("the dispatcher routes by mode") {
    Topology topo = Topology::make_default();
    const CalibrationTable& table = CalibrationTable::builtin_default();
    RoundConfig cfg;
    for (ModeVariant var : ModeVariant::all()) {
        RngStream rng("round/dispatch", 11);
        RoundResult r = run_round(var, topo, table, cfg, rng);
        CHECK(r.variant == var);
        CHECK(r.accuracy > table.quality().chance());
        CHECK(r.total_s > 0.0);
        CHECK(!r.trace.events.empty());
    }
}
