#pragma once

#include <span>
#include <string>
#include <vector>

#include "cetsim/types.hpp"

namespace cetsim {

class LinkDownError : public Error {
public:
    using Error::Error;
};

class NoRouteError : public Error {
public:
    using Error::Error;
};

/// Three-layer topology: exactly one Cloud, >=1 Edge, >=2 Terminals.
/// Every Terminal needs an EdgeLocal link to at least one Edge, every Edge
/// a CloudUplink to the Cloud; PeerD2D links connect Terminals only.
class Topology {
public:
    struct LinkDefaults {
        double cloud_uplink_bps = 50e6;
        double cloud_uplink_prop_s = 5e-3;
        double edge_local_bps = 1e9;
        double edge_local_prop_s = 0.5e-3;
        double d2d_bps = 1e9;
        double d2d_prop_s = 0.1e-3;
        double per_hop_processing_s = 1e-3;
    };

    NodeId add_node(NodeKind kind, std::string label, std::vector<Modality> sensors = {});
    void add_link(LinkSpec link);

    /// Checks the structural invariants; throws Error naming the violation.
    void validate() const;

    /// The shipped default: one cloud, one edge, terminals t1{P,I}, t2{P,C},
    /// t3{P,M}, a full D2D mesh, links per LinkDefaults.
    static Topology make_default();
    static Topology make_default(const LinkDefaults& d);

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<LinkSpec>& links() const { return links_; }

    const Node& node(NodeId id) const;
    const Node* find_node(std::string_view label) const;
    NodeId cloud() const;
    std::vector<NodeId> edge_nodes() const;
    std::vector<NodeId> terminals() const;

    /// First up-or-down link of the given class between the two nodes, in
    /// either direction; nullptr if absent.
    const LinkSpec* find_link(NodeId x, NodeId y, LinkClass c) const;

    /// Flip availability of every link of a class (link failure injection).
    void set_class_up(LinkClass c, bool up);
    bool set_link_up(NodeId x, NodeId y, LinkClass c, bool up);

    /// Edge shared by both nodes via up EdgeLocal links (terminal side) or
    /// by terminal+cloud via EdgeLocal/CloudUplink. Throws NoRouteError.
    NodeId shared_edge(NodeId terminal_a, NodeId terminal_b) const;

    /// Terminals reachable from t over an up PeerD2D link.
    std::vector<NodeId> d2d_peers(NodeId t) const;

private:
    std::vector<Node> nodes_;
    std::vector<LinkSpec> links_;
};

/// Serialization + propagation + per-hop processing delay of one message
/// over one link: bytes*8/bandwidth + prop + proc. Throws LinkDownError if
/// the link is unavailable.
double transmit_latency(std::uint64_t payload_bytes, const LinkSpec& link);

/// Mode-characteristic route:
///   GFM  terminal -> cloud:     [EdgeLocal, CloudUplink]
///   CRM  terminal -> terminal:  [EdgeLocal, EdgeLocal] via one shared edge
///   PIM  terminal -> terminal:  [PeerD2D]
/// Throws NoRouteError if a required link is down or missing.
std::vector<LinkSpec> route(NodeId src, NodeId dst, Mode mode, const Topology& topo);

/// Store-and-forward composition: sum of transmit_latency over the hops.
double path_latency(const Message& msg, std::span<const LinkSpec> path);
double path_latency(std::uint64_t payload_bytes, std::span<const LinkSpec> path);

} // namespace cetsim
