#pragma once

#include <optional>
#include <vector>

#include "cetsim/calibration.hpp"
#include "cetsim/types.hpp"

namespace cetsim {

/// Connectivity summary as seen from one terminal.
struct LinkState {
    bool cloud_reachable = true;
    bool edge_reachable = true;
    bool peer_reachable = true;                // any up D2D link
    std::vector<Modality> borrowable;          // modalities offered by one-hop peers

    static LinkState from_topology(const Topology& topo, NodeId terminal);
};

struct SelectionRequest {
    double latency_budget_s = 1.0;
    double min_accuracy = 0.0;
    Scenario scenario = Scenario::Daytime;
    double snr_db = 25.0;
    std::vector<Modality> local_sensors;
    LinkState link_state;
};

/// Variants whose coverage requirements the current link state satisfies:
/// GFM needs the cloud; CRM needs the edge plus the 3-modality set within
/// local+borrowable; PIM needs a live peer plus the 2-modality set within
/// local+peer sensors. Result in canonical variant order; may be empty.
std::vector<ModeVariant> feasible_variants(const SelectionRequest& req);

struct Selection {
    ModeVariant variant = ModeVariant::from_id(ModeVariant::Id::Gfm);
    double predicted_accuracy = 0.0;
    LatencyBreakdown latency;
    bool degraded = false; // accuracy floor was relaxed to make a pick
    /// Serialized candidate ranking, logged into Decision events.
    std::string ranking;
};

/// Two-stage policy: feasibility filter, then constrained argmax on
/// predicted (clean) accuracy under the latency budget. Ties break by lower
/// communication load rank, then lower total latency, then canonical order.
/// Returns nullopt when nothing fits the latency budget.
std::optional<Selection> select_mode(const SelectionRequest& req, const Topology& topo,
                                     const CalibrationTable& table,
                                     std::span<const CodecSpec> codecs);

std::optional<Selection> select_mode(const SelectionRequest& req, const Topology& topo,
                                     const CalibrationTable& table);

} // namespace cetsim
