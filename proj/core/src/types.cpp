#include "cetsim/types.hpp"

namespace cetsim {

char modality_tag(Modality m) {
    switch (m) {
    case Modality::RfPower: return 'P';
    case Modality::Image: return 'I';
    case Modality::PointCloud: return 'C';
    case Modality::MmWave: return 'M';
    }
    return '?';
}

std::optional<Modality> modality_from_tag(char tag) {
    switch (tag) {
    case 'P': return Modality::RfPower;
    case 'I': return Modality::Image;
    case 'C': return Modality::PointCloud;
    case 'M': return Modality::MmWave;
    default: return std::nullopt;
    }
}

std::string_view mode_name(Mode m) {
    switch (m) {
    case Mode::GFM: return "GFM";
    case Mode::CRM: return "CRM";
    case Mode::PIM: return "PIM";
    }
    return "?";
}

int communication_load_rank(Mode m) {
    switch (m) {
    case Mode::GFM: return 3;
    case Mode::CRM: return 2;
    case Mode::PIM: return 1;
    }
    return 0;
}

namespace {

struct VariantInfo {
    Mode mode;
    std::vector<Modality> modalities;
    std::string name;
};

const std::array<VariantInfo, ModeVariant::kCount>& variant_table() {
    using M = Modality;
    static const std::array<VariantInfo, ModeVariant::kCount> table = {{
        {Mode::GFM, {M::RfPower, M::Image, M::PointCloud, M::MmWave}, "GFM"},
        {Mode::CRM, {M::RfPower, M::Image, M::PointCloud}, "CRM(P+I+C)"},
        {Mode::CRM, {M::RfPower, M::Image, M::MmWave}, "CRM(P+I+M)"},
        {Mode::CRM, {M::RfPower, M::PointCloud, M::MmWave}, "CRM(P+C+M)"},
        {Mode::PIM, {M::RfPower, M::Image}, "PIM(P+I)"},
        {Mode::PIM, {M::RfPower, M::PointCloud}, "PIM(P+C)"},
        {Mode::PIM, {M::RfPower, M::MmWave}, "PIM(P+M)"},
    }};
    return table;
}

} // namespace

const std::array<ModeVariant, ModeVariant::kCount>& ModeVariant::all() {
    static const std::array<ModeVariant, kCount> variants = {
        ModeVariant(Id::Gfm),    ModeVariant(Id::CrmPIC), ModeVariant(Id::CrmPIM),
        ModeVariant(Id::CrmPCM), ModeVariant(Id::PimPI),  ModeVariant(Id::PimPC),
        ModeVariant(Id::PimPM)};
    return variants;
}

std::optional<ModeVariant> ModeVariant::parse(std::string_view text) {
    for (const auto& v : all()) {
        if (v.name() == text) return v;
    }
    return std::nullopt;
}

Mode ModeVariant::mode() const {
    return variant_table()[static_cast<std::size_t>(id_)].mode;
}

std::span<const Modality> ModeVariant::modalities() const {
    return variant_table()[static_cast<std::size_t>(id_)].modalities;
}

bool ModeVariant::has_modality(Modality m) const {
    for (Modality x : modalities()) {
        if (x == m) return true;
    }
    return false;
}

std::string_view ModeVariant::name() const {
    return variant_table()[static_cast<std::size_t>(id_)].name;
}

std::string_view node_kind_name(NodeKind k) {
    switch (k) {
    case NodeKind::Terminal: return "Terminal";
    case NodeKind::Edge: return "Edge";
    case NodeKind::Cloud: return "Cloud";
    }
    return "?";
}

std::string_view link_class_name(LinkClass c) {
    switch (c) {
    case LinkClass::CloudUplink: return "CloudUplink";
    case LinkClass::EdgeLocal: return "EdgeLocal";
    case LinkClass::PeerD2D: return "PeerD2D";
    }
    return "?";
}

std::string_view scenario_name(Scenario s) {
    switch (s) {
    case Scenario::Daytime: return "Daytime";
    case Scenario::Nighttime: return "Nighttime";
    }
    return "?";
}

std::optional<Scenario> scenario_from_name(std::string_view name) {
    if (name == "Daytime" || name == "31") return Scenario::Daytime;
    if (name == "Nighttime" || name == "33") return Scenario::Nighttime;
    return std::nullopt;
}

std::string_view message_kind_name(MessageKind k) {
    switch (k) {
    case MessageKind::FeatureUpload: return "FeatureUpload";
    case MessageKind::Directive: return "Directive";
    case MessageKind::PeerAlert: return "PeerAlert";
    case MessageKind::Ack: return "Ack";
    }
    return "?";
}

} // namespace cetsim
