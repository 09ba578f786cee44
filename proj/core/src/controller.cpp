#include "cetsim/controller.hpp"

#include <algorithm>

namespace cetsim {

LinkState LinkState::from_topology(const Topology& topo, NodeId terminal) {
    LinkState s;
    s.cloud_reachable = false;
    s.edge_reachable = false;
    s.peer_reachable = false;

    for (NodeId e : topo.edge_nodes()) {
        const LinkSpec* local = topo.find_link(terminal, e, LinkClass::EdgeLocal);
        if (!local || !local->up) continue;
        s.edge_reachable = true;
        const LinkSpec* uplink = topo.find_link(e, topo.cloud(), LinkClass::CloudUplink);
        if (uplink && uplink->up) s.cloud_reachable = true;
    }
    for (NodeId peer : topo.d2d_peers(terminal)) {
        s.peer_reachable = true;
        for (Modality m : topo.node(peer).sensors) {
            if (std::find(s.borrowable.begin(), s.borrowable.end(), m) == s.borrowable.end())
                s.borrowable.push_back(m);
        }
    }
    std::sort(s.borrowable.begin(), s.borrowable.end());
    return s;
}

namespace {

bool within(std::span<const Modality> wanted, std::span<const Modality> a,
            std::span<const Modality> b) {
    return std::all_of(wanted.begin(), wanted.end(), [&](Modality m) {
        return std::find(a.begin(), a.end(), m) != a.end() ||
               std::find(b.begin(), b.end(), m) != b.end();
    });
}

} // namespace

std::vector<ModeVariant> feasible_variants(const SelectionRequest& req) {
    std::vector<ModeVariant> out;
    for (const ModeVariant& v : ModeVariant::all()) {
        switch (v.mode()) {
        case Mode::GFM:
            if (req.link_state.cloud_reachable) out.push_back(v);
            break;
        case Mode::CRM:
            if (req.link_state.edge_reachable &&
                within(v.modalities(), req.local_sensors, req.link_state.borrowable))
                out.push_back(v);
            break;
        case Mode::PIM:
            if (req.link_state.peer_reachable &&
                within(v.modalities(), req.local_sensors, req.link_state.borrowable))
                out.push_back(v);
            break;
        }
    }
    return out;
}

std::optional<Selection> select_mode(const SelectionRequest& req, const Topology& topo,
                                     const CalibrationTable& table,
                                     std::span<const CodecSpec> codecs) {
    struct Candidate {
        ModeVariant variant;
        double accuracy;
        LatencyBreakdown latency;
    };
    std::vector<Candidate> fits_budget;
    std::string ranking;

    for (const ModeVariant& v : feasible_variants(req)) {
        LatencyBreakdown lat;
        try {
            lat = total_latency(v, topo, table, codecs);
        } catch (const NoRouteError&) {
            continue; // feasible by link state but no concrete flow endpoints
        }
        const double acc = sensing_accuracy(v, req.scenario, req.snr_db, table);
        ranking += std::string(v.name()) + ":acc=" + format_double(acc) +
                   ":total_ms=" + format_double(lat.total_s * 1e3) +
                   (lat.total_s <= req.latency_budget_s ? "" : ":over_budget") + ";";
        if (lat.total_s <= req.latency_budget_s) fits_budget.push_back({v, acc, lat});
    }
    if (fits_budget.empty()) return std::nullopt;

    auto better = [](const Candidate& a, const Candidate& b) {
        if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
        const int ra = communication_load_rank(a.variant.mode());
        const int rb = communication_load_rank(b.variant.mode());
        if (ra != rb) return ra < rb;
        if (a.latency.total_s != b.latency.total_s) return a.latency.total_s < b.latency.total_s;
        return a.variant < b.variant;
    };

    std::vector<Candidate> meets_floor;
    for (const Candidate& c : fits_budget) {
        if (c.accuracy >= req.min_accuracy) meets_floor.push_back(c);
    }
    const bool degraded = meets_floor.empty();
    const auto& pool = degraded ? fits_budget : meets_floor;
    const Candidate& pick = *std::min_element(
        pool.begin(), pool.end(), [&](const Candidate& a, const Candidate& b) {
            return better(a, b);
        });

    Selection sel;
    sel.variant = pick.variant;
    sel.predicted_accuracy = pick.accuracy;
    sel.latency = pick.latency;
    sel.degraded = degraded;
    sel.ranking = std::move(ranking);
    return sel;
}

std::optional<Selection> select_mode(const SelectionRequest& req, const Topology& topo,
                                     const CalibrationTable& table) {
    const auto codecs = default_codecs();
    return select_mode(req, topo, table, codecs);
}

} // namespace cetsim
