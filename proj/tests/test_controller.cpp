#include <doctest.h>

#include <algorithm>
#include <vector>

#include "cetsim/controller.hpp"
#include "cetsim/engine.hpp"

using namespace cetsim;

namespace {
ModeVariant v(const char* name) {
    auto parsed = ModeVariant::parse(name);
    REQUIRE(parsed.has_value());
    return *parsed;
}

SelectionRequest default_request(const Topology& topo) {
    SelectionRequest req;
    NodeId t1 = topo.find_node("t1")->id;
    req.local_sensors = topo.node(t1).sensors;
    req.link_state = LinkState::from_topology(topo, t1);
    return req;
}
} // namespace

TEST_CASE("link state summarizes connectivity from one terminal") {
    Topology topo = Topology::make_default();
    NodeId t1 = topo.find_node("t1")->id;
    LinkState s = LinkState::from_topology(topo, t1);
    CHECK(s.cloud_reachable);
    CHECK(s.edge_reachable);
    CHECK(s.peer_reachable);
    // Peers t2 and t3 offer P, C, M.
    CHECK(s.borrowable ==
          std::vector<Modality>{Modality::RfPower, Modality::PointCloud, Modality::MmWave});

    topo.set_class_up(LinkClass::CloudUplink, false);
    LinkState s2 = LinkState::from_topology(topo, t1);
    CHECK(!s2.cloud_reachable);
    CHECK(s2.edge_reachable);

    topo.set_class_up(LinkClass::PeerD2D, false);
    LinkState s3 = LinkState::from_topology(topo, t1);
    CHECK(!s3.peer_reachable);
    CHECK(s3.borrowable.empty());
}

TEST_CASE("all seven variants are feasible from a fully connected terminal") {
    Topology topo = Topology::make_default();
    auto req = default_request(topo);
    CHECK(feasible_variants(req).size() == 7);
}

TEST_CASE("feasibility follows the link state") {
    Topology topo = Topology::make_default();
    auto req = default_request(topo);

    SUBCASE("cloud loss removes only the centralized mode") {
        req.link_state.cloud_reachable = false;
        auto fs = feasible_variants(req);
        CHECK(fs.size() == 6);
        for (ModeVariant f : fs) CHECK(f.mode() != Mode::GFM);
    }
    SUBCASE("total isolation leaves nothing") {
        req.link_state = LinkState{};
        req.link_state.cloud_reachable = false;
        req.link_state.edge_reachable = false;
        req.link_state.peer_reachable = false;
        req.link_state.borrowable.clear();
        CHECK(feasible_variants(req).empty());
    }
    SUBCASE("coverage limits the cooperative variants") {
        // Terminal with {P, M}; only one peer offering nothing new.
        req.local_sensors = {Modality::RfPower, Modality::MmWave};
        req.link_state.cloud_reachable = false;
        req.link_state.edge_reachable = false;
        req.link_state.peer_reachable = true;
        req.link_state.borrowable = {Modality::RfPower};
        auto fs = feasible_variants(req);
        REQUIRE(fs.size() == 1);
        CHECK(fs[0] == v("PIM(P+M)"));
    }
    SUBCASE("edge restores the three-modality variants it can cover") {
        req.local_sensors = {Modality::RfPower, Modality::Image};
        req.link_state.cloud_reachable = false;
        req.link_state.edge_reachable = true;
        req.link_state.peer_reachable = true;
        req.link_state.borrowable = {Modality::MmWave};
        auto fs = feasible_variants(req);
        // CRM(P+I+M) plus PIM(P+I) and PIM(P+M).
        CHECK(std::find(fs.begin(), fs.end(), v("CRM(P+I+M)")) != fs.end());
        CHECK(std::find(fs.begin(), fs.end(), v("PIM(P+I)")) != fs.end());
        CHECK(std::find(fs.begin(), fs.end(), v("CRM(P+I+C)")) == fs.end());
    }
}

TEST_CASE("a loose budget buys the most accurate mode") {
    Topology topo = Topology::make_default();
    const CalibrationTable& table = CalibrationTable::builtin_default();
    auto req = default_request(topo);
    req.latency_budget_s = 1.0;
    auto sel = select_mode(req, topo, table);
    REQUIRE(sel.has_value());
    CHECK(sel->variant == v("GFM"));
    CHECK(!sel->degraded);
    CHECK(sel->predicted_accuracy ==
          doctest::Approx(sensing_accuracy(v("GFM"), req.scenario, req.snr_db, table)));
    CHECK(!sel->ranking.empty());
    CHECK(sel->ranking.find("GFM") != std::string::npos);
}

TEST_CASE("a 20 ms budget forces the peer reflex path") {
    Topology topo = Topology::make_default();
    auto req = default_request(topo);
    req.latency_budget_s = 0.020;
    auto sel = select_mode(req, topo, CalibrationTable::builtin_default());
    REQUIRE(sel.has_value());
    CHECK(sel->variant.mode() == Mode::PIM);
    CHECK(sel->latency.total_s <= 0.020);
}

TEST_CASE("cloud loss drops the pick to the best cooperative variant") {
    Topology topo = Topology::make_default();
    topo.set_class_up(LinkClass::CloudUplink, false);
    auto req = default_request(topo);
    req.latency_budget_s = 1.0;
    auto sel = select_mode(req, topo, CalibrationTable::builtin_default());
    REQUIRE(sel.has_value());
    CHECK(sel->variant.mode() == Mode::CRM);
}

TEST_CASE("an impossible budget yields no selection") {
    Topology topo = Topology::make_default();
    auto req = default_request(topo);
    req.latency_budget_s = 1e-6;
    CHECK(!select_mode(req, topo, CalibrationTable::builtin_default()).has_value());
}

TEST_CASE("an unreachable accuracy floor relaxes with a degraded flag") {
    Topology topo = Topology::make_default();
    auto req = default_request(topo);
    req.latency_budget_s = 0.020; // PIM territory
    req.min_accuracy = 0.99;      // no variant reaches this
    auto sel = select_mode(req, topo, CalibrationTable::builtin_default());
    REQUIRE(sel.has_value());
    CHECK(sel->degraded);
    CHECK(sel->variant.mode() == Mode::PIM);
}

TEST_CASE("selection is deterministic") {
    Topology topo = Topology::make_default();
    auto req = default_request(topo);
    auto a = select_mode(req, topo, CalibrationTable::builtin_default());
    auto b = select_mode(req, topo, CalibrationTable::builtin_default());
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    CHECK(a->variant == b->variant);
    CHECK(a->ranking == b->ranking);
}

TEST_CASE("randomized requests always pick from the feasible set") {
    const CalibrationTable& table = CalibrationTable::builtin_default();
    RngStream rng("controller/random", 77);
    int picked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        Topology topo = Topology::make_default();
        if (rng.bernoulli(0.3)) topo.set_class_up(LinkClass::CloudUplink, false);
        if (rng.bernoulli(0.3)) topo.set_class_up(LinkClass::PeerD2D, false);
        if (rng.bernoulli(0.15)) topo.set_class_up(LinkClass::EdgeLocal, false);

        SelectionRequest req;
        NodeId t1 = topo.find_node("t1")->id;
        req.local_sensors = topo.node(t1).sensors;
        req.link_state = LinkState::from_topology(topo, t1);
        req.latency_budget_s = rng.next_uniform() * 0.5;
        req.min_accuracy = rng.next_uniform() * 0.8;
        req.scenario = rng.bernoulli(0.5) ? Scenario::Daytime : Scenario::Nighttime;
        req.snr_db = rng.next_uniform() * 40.0 - 10.0;

        auto feasible = feasible_variants(req);
        auto sel = select_mode(req, topo, table);
        if (!sel) continue;
        ++picked;
        CHECK(std::find(feasible.begin(), feasible.end(), sel->variant) != feasible.end());
        CHECK(sel->latency.total_s <= req.latency_budget_s);
        if (!req.link_state.cloud_reachable) CHECK(sel->variant.mode() != Mode::GFM);
        if (!sel->degraded) CHECK(sel->predicted_accuracy >= req.min_accuracy);
    }
    CHECK(picked > 100); // the sweep actually exercised selections
}

TEST_CASE("a larger budget never selects a less accurate variant") {
    Topology topo = Topology::make_default();
    const CalibrationTable& table = CalibrationTable::builtin_default();
    RngStream rng("controller/budget-monotone", 5);
    for (int trial = 0; trial < 500; ++trial) {
        auto req = default_request(topo);
        double b1 = rng.next_uniform() * 0.5;
        double b2 = b1 + rng.next_uniform() * 0.5;
        req.min_accuracy = rng.next_uniform() * 0.8;
        req.snr_db = rng.next_uniform() * 40.0 - 10.0;

        req.latency_budget_s = b1;
        auto tight = select_mode(req, topo, table);
        req.latency_budget_s = b2;
        auto loose = select_mode(req, topo, table);
        if (!tight.has_value()) continue;
        REQUIRE(loose.has_value());
        CHECK(loose->predicted_accuracy >= tight->predicted_accuracy);
    }
}

TEST_CASE("ties favor the lighter communication load") {
    // Two variants with equal predicted accuracy: force this by an extreme
    // low SNR where every variant sits at the chance floor.
    Topology topo = Topology::make_default();
    auto req = default_request(topo);
    req.snr_db = -300.0;
    req.latency_budget_s = 1.0;
    auto sel = select_mode(req, topo, CalibrationTable::builtin_default());
    REQUIRE(sel.has_value());
    CHECK(sel->variant.mode() == Mode::PIM); // rank 1 beats CRM(2) and GFM(3)
}
