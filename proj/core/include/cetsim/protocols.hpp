#pragma once

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cetsim/calibration.hpp"
#include "cetsim/engine.hpp"
#include "cetsim/netmodel.hpp"
#include "cetsim/semantics.hpp"
#include "cetsim/types.hpp"

namespace cetsim {

class ModeInfeasibleError : public Error {
public:
    using Error::Error;
};

class UntrustedFeatureError : public Error {
public:
    using Error::Error;
};

/// Semantic directive issued by an edge relay ("focus radar on (x, y)").
/// Wire format, bit-exact:
///   DIR v1|issuer=<id>|mod=<tag>|action=focus|x=<real>|y=<real>|sig=<0|1>
struct Directive {
    NodeId issuer;
    Modality target_modality = Modality::MmWave;
    std::string action = "focus";
    double x = 0.0;
    double y = 0.0;
    bool signature_valid = true;

    std::string serialize() const;
    static std::optional<Directive> parse(std::string_view wire);
};

/// Decentralized trust weights over peers, clamped to [0,1]. Corroborated
/// reports pull the weight toward 1, uncorroborated ones decay it; peers
/// below the ignore threshold are excluded from fusion.
struct ReputationState {
    std::map<NodeId, double> weights;
    double decay = 0.8;
    double reward = 0.2;
    double ignore_threshold = 0.5;

    double weight(NodeId peer) const;
    void update(NodeId peer, bool corroborated);
    bool trusted(NodeId peer) const { return weight(peer) >= ignore_threshold; }
};

enum class Tool : std::uint8_t { Encode, Transmit, AdjustBeam, RaiseAlert, VerifyDirective, NoOp };

std::string_view tool_name(Tool t);

/// Fig. 2(c)-style agent: knowledge base, bounded observation memory, and a
/// deterministic rule table mapping percepts to tool actions. Unknown
/// percepts map to NoOp.
class Agent {
public:
    static constexpr std::size_t kMemoryCapacity = 128;

    Agent(NodeId node, std::map<std::string, std::string> knowledge = {});

    NodeId node() const { return node_; }

    const std::string* fact(const std::string& key) const;
    void observe(double time_s, std::string observation);
    const std::deque<std::pair<double, std::string>>& memory() const { return memory_; }

    void add_rule(std::string percept, Tool tool);
    Tool react(const std::string& percept) const;

private:
    NodeId node_;
    std::map<std::string, std::string> knowledge_;
    std::deque<std::pair<double, std::string>> memory_;
    std::map<std::string, Tool> rules_;
};

/// Default knowledge base: zone facts mapping a terminal label to the
/// coordinates the edge relay should steer peers toward.
std::map<std::string, std::string> default_zone_facts();

/// Deterministic edge-relay translation of an accepted cue feature into a
/// focus directive using the knowledge base's zone facts. Throws
/// UntrustedFeatureError on a watermark-invalid feature.
Directive crm_translate(const SemanticFeature& feature, const Agent& relay,
                        const Topology& topo, Modality guided);

/// Physics-aware plausibility check on a peer alert: truthful alerts always
/// pass; falsified ones fail with probability detection_prob.
bool pim_consistency_check(const Message& alert, std::string_view local_observation,
                           double detection_prob, RngStream& rng);

ReputationState reputation_update(ReputationState state, NodeId peer, bool corroborated);

struct DefenseConfig {
    double watermark_detection = 0.9;  // GFM fusion gate
    bool directive_verification = true; // CRM zero-trust check
    double consistency_detection = 0.9; // PIM physics check
    bool reputation_enabled = true;
};

struct RoundConfig {
    Scenario scenario = Scenario::Daytime;
    double snr_db = 25.0;
    std::vector<CodecSpec> codecs = default_codec_vector();
    std::vector<AttackSpec> attacks;
    DefenseConfig defenses;
    std::uint64_t alert_payload_bytes = 2048;
};

struct RoundResult {
    ModeVariant variant = ModeVariant::from_id(ModeVariant::Id::Gfm);
    double accuracy = 0.0;
    double inference_s = 0.0;
    double transmission_s = 0.0;
    double total_s = 0.0;
    std::uint64_t bytes_tx = 0;
    int attacks_hit = 0;
    int defenses_hit = 0;
    Trace trace;
};

/// Centralized fusion round: every terminal encodes its modalities, uploads
/// to its edge, the edge forwards one aggregated upload to the cloud, and
/// the cloud fuses the watermark-accepted features.
RoundResult run_gfm_round(const Topology& topo, const CalibrationTable& table,
                          const RoundConfig& cfg, RngStream& rng);

/// Sense-and-guide round: the cue terminal uploads its feature to the edge,
/// the edge translates it into a directive for the guided terminal, which
/// verifies, steers its beam, and fuses the variant's modalities. A rejected
/// directive degrades the round to the source's best PIM variant.
RoundResult run_crm_round(ModeVariant variant, const Topology& topo,
                          const CalibrationTable& table, const RoundConfig& cfg,
                          RngStream& rng);

/// Peer round: both terminals infer locally and exchange one alert over the
/// D2D link; the receiver consistency-checks the alert and updates the
/// sender's reputation.
RoundResult run_pim_round(ModeVariant variant, const Topology& topo,
                          const CalibrationTable& table, const RoundConfig& cfg, RngStream& rng,
                          ReputationState* reputation = nullptr);

/// Dispatch by variant mode (GFM ignores the variant's modality subset since
/// it always fuses all four).
RoundResult run_round(ModeVariant variant, const Topology& topo, const CalibrationTable& table,
                      const RoundConfig& cfg, RngStream& rng,
                      ReputationState* reputation = nullptr);

} // namespace cetsim
