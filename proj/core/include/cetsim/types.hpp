#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cetsim {

/// Sensing modalities. The declaration order P < I < C < M is the canonical
/// order used everywhere (variant names, serialized modality sets).
enum class Modality : std::uint8_t {
    RfPower = 0,    // P
    Image = 1,      // I
    PointCloud = 2, // C
    MmWave = 3,     // M
};

inline constexpr std::array<Modality, 4> kAllModalities = {
    Modality::RfPower, Modality::Image, Modality::PointCloud, Modality::MmWave};

char modality_tag(Modality m);
std::optional<Modality> modality_from_tag(char tag);

enum class Mode : std::uint8_t { GFM, CRM, PIM };

std::string_view mode_name(Mode m);

/// Relative communication load per Table-style mode comparison:
/// GFM=3 (high), CRM=2 (moderate), PIM=1 (low). Lower is lighter; used as a
/// tie-breaker by the mode controller.
int communication_load_rank(Mode m);

/// One of the seven legal fusion configurations. The set is closed: values
/// can only be obtained from all(), from_id() or parse(), so an instance is
/// always a valid variant.
class ModeVariant {
public:
    enum class Id : std::uint8_t {
        Gfm = 0,
        CrmPIC,
        CrmPIM,
        CrmPCM,
        PimPI,
        PimPC,
        PimPM,
    };
    static constexpr std::size_t kCount = 7;

    static const std::array<ModeVariant, kCount>& all();
    static ModeVariant from_id(Id id) { return ModeVariant(id); }
    static std::optional<ModeVariant> parse(std::string_view text);

    Id id() const { return id_; }
    Mode mode() const;
    /// Modalities in canonical P<I<C<M order.
    std::span<const Modality> modalities() const;
    bool has_modality(Modality m) const;
    /// Canonical text form: "GFM", "CRM(P+I+C)", "PIM(P+M)", ...
    std::string_view name() const;

    friend bool operator==(ModeVariant a, ModeVariant b) { return a.id_ == b.id_; }
    friend auto operator<=>(ModeVariant a, ModeVariant b) { return a.id_ <=> b.id_; }

private:
    explicit ModeVariant(Id id) : id_(id) {}
    Id id_;
};

/// Canonical modality set of a variant, in P<I<C<M order.
inline std::span<const Modality> variant_modalities(ModeVariant v) { return v.modalities(); }

struct NodeId {
    std::uint32_t value = 0;
    friend bool operator==(NodeId, NodeId) = default;
    friend auto operator<=>(NodeId, NodeId) = default;
};

enum class NodeKind : std::uint8_t { Terminal, Edge, Cloud };

std::string_view node_kind_name(NodeKind k);

struct Node {
    NodeId id;
    NodeKind kind = NodeKind::Terminal;
    std::string label;
    std::vector<Modality> sensors; // non-empty iff Terminal
};

enum class LinkClass : std::uint8_t { CloudUplink, EdgeLocal, PeerD2D };

std::string_view link_class_name(LinkClass c);

struct LinkSpec {
    NodeId a;
    NodeId b;
    double bandwidth_bits_per_s = 0.0;
    double propagation_s = 0.0;
    double per_hop_processing_s = 0.0;
    bool up = true;
    LinkClass link_class = LinkClass::EdgeLocal;

    bool connects(NodeId x, NodeId y) const {
        return (a == x && b == y) || (a == y && b == x);
    }
};

enum class Scenario : std::uint8_t { Daytime = 31, Nighttime = 33 };

inline constexpr std::array<Scenario, 2> kAllScenarios = {Scenario::Daytime,
                                                          Scenario::Nighttime};

std::string_view scenario_name(Scenario s);
std::optional<Scenario> scenario_from_name(std::string_view name);

struct ScenarioConfig {
    Scenario scenario = Scenario::Daytime;
    double snr_db = 25.0; // valid range [-10, 30]
    std::uint64_t seed = 0;
    std::uint32_t num_beams = 64; // classification cardinality K, >= 2
};

/// Compressed, typed sensing payload. fidelity in [0,1] stands in for the
/// reconstruction quality of the latent representation.
struct SemanticFeature {
    Modality modality = Modality::RfPower;
    std::uint64_t payload_bytes = 1;
    double fidelity = 1.0;
    NodeId origin;
    bool tampered = false;
    bool watermark_valid = true;
};

enum class MessageKind : std::uint8_t { FeatureUpload, Directive, PeerAlert, Ack };

std::string_view message_kind_name(MessageKind k);

struct Message {
    MessageKind kind = MessageKind::Ack;
    std::uint64_t payload_bytes = 0;
    NodeId src;
    NodeId dst;
    std::optional<SemanticFeature> feature; // set iff FeatureUpload
    std::string body;                       // set for Directive / PeerAlert
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace cetsim
