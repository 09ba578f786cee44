#include "cetsim/netmodel.hpp"

#include <algorithm>
#include <cmath>

namespace cetsim {

NodeId Topology::add_node(NodeKind kind, std::string label, std::vector<Modality> sensors) {
    NodeId id{static_cast<std::uint32_t>(nodes_.size())};
    std::sort(sensors.begin(), sensors.end());
    sensors.erase(std::unique(sensors.begin(), sensors.end()), sensors.end());
    nodes_.push_back(Node{id, kind, std::move(label), std::move(sensors)});
    return id;
}

void Topology::add_link(LinkSpec link) {
    if (link.bandwidth_bits_per_s <= 0.0) throw Error("link bandwidth must be positive");
    if (!(link.propagation_s >= 0.0) || !std::isfinite(link.propagation_s) ||
        !(link.per_hop_processing_s >= 0.0) || !std::isfinite(link.per_hop_processing_s)) {
        throw Error("link delays must be finite and non-negative");
    }
    links_.push_back(std::move(link));
}

void Topology::validate() const {
    std::size_t clouds = 0, edges = 0, terms = 0;
    for (const Node& n : nodes_) {
        switch (n.kind) {
        case NodeKind::Cloud: ++clouds; break;
        case NodeKind::Edge: ++edges; break;
        case NodeKind::Terminal:
            ++terms;
            if (n.sensors.empty()) throw Error("terminal " + n.label + " has no sensors");
            break;
        }
    }
    if (clouds != 1) throw Error("topology must have exactly one cloud node");
    if (edges < 1) throw Error("topology must have at least one edge node");
    if (terms < 2) throw Error("topology must have at least two terminals");

    for (const LinkSpec& l : links_) {
        const Node& a = node(l.a);
        const Node& b = node(l.b);
        switch (l.link_class) {
        case LinkClass::PeerD2D:
            if (a.kind != NodeKind::Terminal || b.kind != NodeKind::Terminal)
                throw Error("PeerD2D link must connect two terminals");
            break;
        case LinkClass::EdgeLocal:
            if (!((a.kind == NodeKind::Terminal && b.kind == NodeKind::Edge) ||
                  (a.kind == NodeKind::Edge && b.kind == NodeKind::Terminal)))
                throw Error("EdgeLocal link must connect a terminal and an edge");
            break;
        case LinkClass::CloudUplink:
            if (!((a.kind == NodeKind::Edge && b.kind == NodeKind::Cloud) ||
                  (a.kind == NodeKind::Cloud && b.kind == NodeKind::Edge)))
                throw Error("CloudUplink link must connect an edge and the cloud");
            break;
        }
    }
    for (const Node& n : nodes_) {
        if (n.kind == NodeKind::Terminal) {
            bool attached = std::any_of(links_.begin(), links_.end(), [&](const LinkSpec& l) {
                return l.link_class == LinkClass::EdgeLocal && (l.a == n.id || l.b == n.id);
            });
            if (!attached) throw Error("terminal " + n.label + " has no EdgeLocal link");
        }
        if (n.kind == NodeKind::Edge) {
            bool uplinked = std::any_of(links_.begin(), links_.end(), [&](const LinkSpec& l) {
                return l.link_class == LinkClass::CloudUplink && (l.a == n.id || l.b == n.id);
            });
            if (!uplinked) throw Error("edge " + n.label + " has no CloudUplink");
        }
    }
}

Topology Topology::make_default() { return make_default(LinkDefaults{}); }

Topology Topology::make_default(const LinkDefaults& d) {
    using M = Modality;
    Topology t;
    NodeId cloud = t.add_node(NodeKind::Cloud, "cloud");
    NodeId e1 = t.add_node(NodeKind::Edge, "e1");
    NodeId t1 = t.add_node(NodeKind::Terminal, "t1", {M::RfPower, M::Image});
    NodeId t2 = t.add_node(NodeKind::Terminal, "t2", {M::RfPower, M::PointCloud});
    NodeId t3 = t.add_node(NodeKind::Terminal, "t3", {M::RfPower, M::MmWave});

    t.add_link({e1, cloud, d.cloud_uplink_bps, d.cloud_uplink_prop_s, d.per_hop_processing_s,
                true, LinkClass::CloudUplink});
    for (NodeId term : {t1, t2, t3}) {
        t.add_link({term, e1, d.edge_local_bps, d.edge_local_prop_s, d.per_hop_processing_s,
                    true, LinkClass::EdgeLocal});
    }
    t.add_link({t1, t2, d.d2d_bps, d.d2d_prop_s, d.per_hop_processing_s, true, LinkClass::PeerD2D});
    t.add_link({t1, t3, d.d2d_bps, d.d2d_prop_s, d.per_hop_processing_s, true, LinkClass::PeerD2D});
    t.add_link({t2, t3, d.d2d_bps, d.d2d_prop_s, d.per_hop_processing_s, true, LinkClass::PeerD2D});
    t.validate();
    return t;
}

const Node& Topology::node(NodeId id) const {
    if (id.value >= nodes_.size()) throw Error("unknown node id");
    return nodes_[id.value];
}

const Node* Topology::find_node(std::string_view label) const {
    for (const Node& n : nodes_) {
        if (n.label == label) return &n;
    }
    return nullptr;
}

NodeId Topology::cloud() const {
    for (const Node& n : nodes_) {
        if (n.kind == NodeKind::Cloud) return n.id;
    }
    throw Error("topology has no cloud node");
}

std::vector<NodeId> Topology::edge_nodes() const {
    std::vector<NodeId> out;
    for (const Node& n : nodes_) {
        if (n.kind == NodeKind::Edge) out.push_back(n.id);
    }
    return out;
}

std::vector<NodeId> Topology::terminals() const {
    std::vector<NodeId> out;
    for (const Node& n : nodes_) {
        if (n.kind == NodeKind::Terminal) out.push_back(n.id);
    }
    return out;
}

const LinkSpec* Topology::find_link(NodeId x, NodeId y, LinkClass c) const {
    for (const LinkSpec& l : links_) {
        if (l.link_class == c && l.connects(x, y)) return &l;
    }
    return nullptr;
}

void Topology::set_class_up(LinkClass c, bool up) {
    for (LinkSpec& l : links_) {
        if (l.link_class == c) l.up = up;
    }
}

bool Topology::set_link_up(NodeId x, NodeId y, LinkClass c, bool up) {
    for (LinkSpec& l : links_) {
        if (l.link_class == c && l.connects(x, y)) {
            l.up = up;
            return true;
        }
    }
    return false;
}

NodeId Topology::shared_edge(NodeId a, NodeId b) const {
    for (NodeId e : edge_nodes()) {
        const LinkSpec* la = find_link(a, e, LinkClass::EdgeLocal);
        const LinkSpec* lb = (node(b).kind == NodeKind::Cloud)
                                 ? find_link(e, b, LinkClass::CloudUplink)
                                 : find_link(b, e, LinkClass::EdgeLocal);
        if (la && la->up && lb && lb->up) return e;
    }
    throw NoRouteError("no shared edge between " + node(a).label + " and " + node(b).label);
}

std::vector<NodeId> Topology::d2d_peers(NodeId t) const {
    std::vector<NodeId> out;
    for (const LinkSpec& l : links_) {
        if (l.link_class == LinkClass::PeerD2D && l.up && (l.a == t || l.b == t)) {
            out.push_back(l.a == t ? l.b : l.a);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

double transmit_latency(std::uint64_t payload_bytes, const LinkSpec& link) {
    if (!link.up) throw LinkDownError("link is down");
    return static_cast<double>(payload_bytes) * 8.0 / link.bandwidth_bits_per_s +
           link.propagation_s + link.per_hop_processing_s;
}

std::vector<LinkSpec> route(NodeId src, NodeId dst, Mode mode, const Topology& topo) {
    if (src == dst) throw Error("route: src == dst");
    switch (mode) {
    case Mode::GFM: {
        NodeId e = topo.shared_edge(src, dst); // throws NoRouteError
        const LinkSpec* up1 = topo.find_link(src, e, LinkClass::EdgeLocal);
        const LinkSpec* up2 = topo.find_link(e, dst, LinkClass::CloudUplink);
        if (!up1 || !up1->up || !up2 || !up2->up) throw NoRouteError("cloud route unavailable");
        return {*up1, *up2};
    }
    case Mode::CRM: {
        NodeId e = topo.shared_edge(src, dst);
        const LinkSpec* h1 = topo.find_link(src, e, LinkClass::EdgeLocal);
        const LinkSpec* h2 = topo.find_link(e, dst, LinkClass::EdgeLocal);
        if (!h1 || !h1->up || !h2 || !h2->up) throw NoRouteError("edge relay unavailable");
        return {*h1, *h2};
    }
    case Mode::PIM: {
        const LinkSpec* l = topo.find_link(src, dst, LinkClass::PeerD2D);
        if (!l || !l->up) throw NoRouteError("no up PeerD2D link");
        return {*l};
    }
    }
    throw Error("route: unknown mode");
}

double path_latency(std::uint64_t payload_bytes, std::span<const LinkSpec> path) {
    if (path.empty()) throw Error("path_latency: empty path");
    double total = 0.0;
    for (const LinkSpec& l : path) total += transmit_latency(payload_bytes, l);
    return total;
}

double path_latency(const Message& msg, std::span<const LinkSpec> path) {
    return path_latency(msg.payload_bytes, path);
}

} // namespace cetsim
