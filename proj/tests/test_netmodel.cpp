#include <doctest.h>

#include <cmath>
#include <vector>

#include "cetsim/engine.hpp"
#include "cetsim/netmodel.hpp"

using namespace cetsim;

namespace {
LinkSpec make_link(double bps, double prop_s, double proc_s, bool up = true,
                   LinkClass c = LinkClass::EdgeLocal) {
    LinkSpec l;
    l.a = NodeId{0};
    l.b = NodeId{1};
    l.bandwidth_bits_per_s = bps;
    l.propagation_s = prop_s;
    l.per_hop_processing_s = proc_s;
    l.up = up;
    l.link_class = c;
    return l;
}
} // namespace

TEST_CASE("transmit latency golden values") {
    // 2 MB over 50 Mbps, no extra delays: 2e6*8/50e6 = 0.320 s.
    CHECK(transmit_latency(2'000'000, make_link(50e6, 0, 0)) == doctest::Approx(0.320).epsilon(1e-12));
    // Zero payload: propagation + processing only.
    CHECK(transmit_latency(0, make_link(1e9, 2e-3, 1e-3)) == doctest::Approx(0.003).epsilon(1e-12));
    // Alert frame on a D2D link: 2048*8/1e9 + 0.1 ms + 1 ms = 1.116384 ms.
    CHECK(transmit_latency(2048, make_link(1e9, 0.1e-3, 1e-3)) ==
          doctest::Approx(1.116384e-3).epsilon(1e-12));
}

TEST_CASE("a down link refuses to carry traffic") {
    CHECK_THROWS_AS(transmit_latency(1024, make_link(1e9, 0, 0, /*up=*/false)), LinkDownError);
}

TEST_CASE("path latency composes store-and-forward hops") {
    std::vector<LinkSpec> path = {make_link(1e9, 0, 1e-3), make_link(50e6, 0, 2e-3)};
    // 2e6*8/1e9 + 1e-3 = 0.017; 2e6*8/50e6 + 2e-3 = 0.322; total 0.339.
    CHECK(path_latency(2'000'000, path) == doctest::Approx(0.339).epsilon(1e-12));
    // Single hop equals transmit_latency; two identical hops double it.
    LinkSpec one = make_link(1e9, 0.5e-3, 1e-3);
    std::vector<LinkSpec> single = {one};
    std::vector<LinkSpec> twice = {one, one};
    CHECK(path_latency(4096, single) == doctest::Approx(transmit_latency(4096, one)));
    CHECK(path_latency(4096, twice) == doctest::Approx(2 * transmit_latency(4096, one)));
}

TEST_CASE("latency is monotone in payload and inversely monotone in bandwidth") {
    RngStream rng("netmodel/monotone", 11);
    for (int i = 0; i < 100; ++i) {
        std::uint64_t small = 1 + (rng.next_u64() % 1'000'000);
        std::uint64_t large = small + 1 + (rng.next_u64() % 1'000'000);
        double bw = 1e6 + rng.next_uniform() * 1e9;
        LinkSpec l = make_link(bw, rng.next_uniform() * 1e-2, rng.next_uniform() * 1e-2);
        CHECK(transmit_latency(small, l) < transmit_latency(large, l));
        LinkSpec faster = l;
        faster.bandwidth_bits_per_s = bw * 2;
        CHECK(transmit_latency(small, faster) < transmit_latency(small, l));
    }
}

TEST_CASE("default topology has the documented shape") {
    Topology topo = Topology::make_default();
    CHECK_NOTHROW(topo.validate());
    int terminals = 0, edges = 0, clouds = 0;
    for (const auto& n : topo.nodes()) {
        if (n.kind == NodeKind::Terminal) ++terminals;
        if (n.kind == NodeKind::Edge) ++edges;
        if (n.kind == NodeKind::Cloud) ++clouds;
    }
    CHECK(terminals == 3);
    CHECK(edges == 1);
    CHECK(clouds == 1);
    const Node* t1 = topo.find_node("t1");
    REQUIRE(t1 != nullptr);
    CHECK(t1->sensors == std::vector<Modality>{Modality::RfPower, Modality::Image});
    CHECK(topo.find_node("t2")->sensors ==
          std::vector<Modality>{Modality::RfPower, Modality::PointCloud});
    CHECK(topo.find_node("t3")->sensors ==
          std::vector<Modality>{Modality::RfPower, Modality::MmWave});
    // Full D2D mesh over three terminals.
    auto ts = topo.terminals();
    REQUIRE(ts.size() == 3);
    for (NodeId t : ts) CHECK(topo.d2d_peers(t).size() == 2);
}

TEST_CASE("validation rejects structurally broken topologies") {
    Topology topo; // no cloud at all
    topo.add_node(NodeKind::Edge, "e1");
    topo.add_node(NodeKind::Terminal, "t1", {Modality::RfPower});
    topo.add_node(NodeKind::Terminal, "t2", {Modality::RfPower});
    CHECK_THROWS_AS(topo.validate(), Error);
}

TEST_CASE("routes have the mode-characteristic shapes") {
    Topology topo = Topology::make_default();
    NodeId t1 = topo.find_node("t1")->id;
    NodeId t2 = topo.find_node("t2")->id;

    auto gfm = route(t1, topo.cloud(), Mode::GFM, topo);
    REQUIRE(gfm.size() == 2);
    CHECK(gfm[0].link_class == LinkClass::EdgeLocal);
    CHECK(gfm[1].link_class == LinkClass::CloudUplink);

    auto crm = route(t1, t2, Mode::CRM, topo);
    REQUIRE(crm.size() == 2);
    CHECK(crm[0].link_class == LinkClass::EdgeLocal);
    CHECK(crm[1].link_class == LinkClass::EdgeLocal);

    auto pim = route(t1, t2, Mode::PIM, topo);
    REQUIRE(pim.size() == 1);
    CHECK(pim[0].link_class == LinkClass::PeerD2D);
}

TEST_CASE("downed link classes break the corresponding routes") {
    Topology topo = Topology::make_default();
    NodeId t1 = topo.find_node("t1")->id;
    NodeId t2 = topo.find_node("t2")->id;
    topo.set_class_up(LinkClass::CloudUplink, false);
    CHECK_THROWS_AS(route(t1, topo.cloud(), Mode::GFM, topo), NoRouteError);
    CHECK_NOTHROW(route(t1, t2, Mode::PIM, topo)); // D2D unaffected
    topo.set_class_up(LinkClass::PeerD2D, false);
    CHECK_THROWS_AS(route(t1, t2, Mode::PIM, topo), NoRouteError);
    CHECK_NOTHROW(route(t1, t2, Mode::CRM, topo));
    topo.set_class_up(LinkClass::EdgeLocal, false);
    CHECK_THROWS_AS(route(t1, t2, Mode::CRM, topo), NoRouteError);
}

TEST_CASE("single link failure injection is addressable") {
    Topology topo = Topology::make_default();
    NodeId t1 = topo.find_node("t1")->id;
    NodeId t2 = topo.find_node("t2")->id;
    NodeId t3 = topo.find_node("t3")->id;
    CHECK(topo.set_link_up(t1, t2, LinkClass::PeerD2D, false));
    CHECK_THROWS_AS(route(t1, t2, Mode::PIM, topo), NoRouteError);
    CHECK_NOTHROW(route(t1, t3, Mode::PIM, topo)); // other peer still up
    CHECK(!topo.set_link_up(t1, topo.cloud(), LinkClass::PeerD2D, false)); // no such link
}

TEST_CASE("default uplink carries the aggregate upload slower than 300 ms") {
    Topology topo = Topology::make_default();
    const LinkSpec* up = topo.find_link(topo.edge_nodes().front(), topo.cloud(),
                                        LinkClass::CloudUplink);
    REQUIRE(up != nullptr);
    CHECK(transmit_latency(2'005'402, *up) > 0.300);
}
