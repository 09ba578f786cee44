#include "cetsim/semantics.hpp"

#include <algorithm>
#include <cmath>

namespace cetsim {

std::array<CodecSpec, 4> default_codecs() {
    return {{
        {Modality::RfPower, 131072, 0.50, 0.95},
        {Modality::Image, 20971520, 0.05, 0.95},
        {Modality::PointCloud, 7864320, 0.10, 0.95},
        {Modality::MmWave, 524288, 0.20, 0.95},
    }};
}

std::vector<CodecSpec> default_codec_vector() {
    const auto a = default_codecs();
    return {a.begin(), a.end()};
}

const CodecSpec& codec_for(std::span<const CodecSpec> codecs, Modality m) {
    for (const CodecSpec& c : codecs) {
        if (c.modality == m) return c;
    }
    throw Error(std::string("no codec for modality ") + modality_tag(m));
}

std::string_view attack_kind_name(AttackKind k) {
    switch (k) {
    case AttackKind::SemanticTamper: return "SemanticTamper";
    case AttackKind::MaliciousRelay: return "MaliciousRelay";
    case AttackKind::CrossModalMislead: return "CrossModalMislead";
    }
    return "?";
}

std::vector<double> minmax_normalize(std::span<const double> seq) {
    if (seq.empty()) throw Error("minmax_normalize: empty sequence");
    double sum = 0.0;
    std::size_t finite = 0;
    for (double x : seq) {
        if (std::isfinite(x)) {
            sum += x;
            ++finite;
        }
    }
    if (finite == 0) throw AllMissingError("minmax_normalize: no finite entry");
    const double mean = sum / static_cast<double>(finite);

    std::vector<double> imputed(seq.begin(), seq.end());
    for (double& x : imputed) {
        if (!std::isfinite(x)) x = mean;
    }
    const auto [mn_it, mx_it] = std::minmax_element(imputed.begin(), imputed.end());
    const double mn = *mn_it, mx = *mx_it;
    if (mx == mn) {
        std::fill(imputed.begin(), imputed.end(), 0.0);
        return imputed;
    }
    for (double& x : imputed) x = (x - mn) / (mx - mn);
    return imputed;
}

std::vector<Vec3> unit_sphere_pad(std::span<const Vec3> points, std::size_t target_count) {
    if (points.empty()) throw Error("unit_sphere_pad: empty cloud");
    if (points.size() > target_count)
        throw TooManyPointsError("unit_sphere_pad: more points than target count");

    Vec3 centroid{0.0, 0.0, 0.0};
    for (const Vec3& p : points) {
        for (int i = 0; i < 3; ++i) centroid[i] += p[i];
    }
    for (int i = 0; i < 3; ++i) centroid[i] /= static_cast<double>(points.size());

    std::vector<Vec3> out(points.begin(), points.end());
    double max_norm = 0.0;
    for (Vec3& p : out) {
        for (int i = 0; i < 3; ++i) p[i] -= centroid[i];
        max_norm = std::max(max_norm, std::hypot(p[0], p[1], p[2]));
    }
    if (max_norm == 0.0) {
        // Degenerate cloud: every point equals the centroid.
        std::fill(out.begin(), out.end(), Vec3{0.0, 0.0, 0.0});
    } else {
        for (Vec3& p : out) {
            for (int i = 0; i < 3; ++i) p[i] /= max_norm;
        }
    }
    out.resize(target_count, Vec3{0.0, 0.0, 0.0});
    return out;
}

std::vector<std::complex<double>> normalize_iq(std::span<const std::complex<double>> iq) {
    if (iq.empty()) throw Error("normalize_iq: empty sequence");
    double max_mag = 0.0;
    for (const auto& z : iq) max_mag = std::max(max_mag, std::abs(z));
    if (max_mag == 0.0) throw AllZeroError("normalize_iq: all-zero sequence");
    std::vector<std::complex<double>> out(iq.begin(), iq.end());
    for (auto& z : out) z /= max_mag;
    return out;
}

SemanticFeature encode(Modality modality, const CodecSpec& codec, NodeId origin) {
    if (codec.modality != modality)
        throw ModalityMismatchError(std::string("encode: codec for ") +
                                    modality_tag(codec.modality) + " used with " +
                                    modality_tag(modality));
    SemanticFeature f;
    f.modality = modality;
    f.payload_bytes = static_cast<std::uint64_t>(
        std::ceil(static_cast<double>(codec.raw_bytes) * codec.compression_ratio));
    if (f.payload_bytes == 0) f.payload_bytes = 1;
    f.fidelity = codec.base_fidelity;
    f.origin = origin;
    f.tampered = false;
    f.watermark_valid = true;
    return f;
}

bool inject_attack(SemanticFeature& target, const AttackSpec& attack, RngStream& rng) {
    if (attack.kind != AttackKind::SemanticTamper)
        throw IncompatibleAttackError("only SemanticTamper applies to a feature");
    if (!rng.bernoulli(attack.probability)) return false;
    target.fidelity *= attack.severity;
    target.tampered = true;
    target.watermark_valid = false; // fragile watermark breaks on tampering
    return true;
}

namespace {

// Rewrites one key=value token inside a '|'-separated wire body.
void replace_field(std::string& body, std::string_view key, std::string_view value) {
    const std::string needle = std::string(key) + "=";
    std::size_t pos = body.find(needle);
    if (pos == std::string::npos) return;
    pos += needle.size();
    std::size_t end = body.find('|', pos);
    if (end == std::string::npos) end = body.size();
    body.replace(pos, end - pos, value);
}

} // namespace

bool inject_attack(Message& target, const AttackSpec& attack, RngStream& rng) {
    switch (attack.kind) {
    case AttackKind::MaliciousRelay: {
        if (target.kind != MessageKind::Directive)
            throw IncompatibleAttackError("MaliciousRelay applies to a Directive");
        if (!rng.bernoulli(attack.probability)) return false;
        // Inject fake guidance: bogus coordinates, broken signature.
        const double fake_x = 1000.0 + 1000.0 * rng.next_uniform();
        const double fake_y = 1000.0 + 1000.0 * rng.next_uniform();
        replace_field(target.body, "x", format_double(fake_x));
        replace_field(target.body, "y", format_double(fake_y));
        replace_field(target.body, "sig", "0");
        return true;
    }
    case AttackKind::CrossModalMislead: {
        if (target.kind != MessageKind::PeerAlert)
            throw IncompatibleAttackError("CrossModalMislead applies to a PeerAlert");
        if (!rng.bernoulli(attack.probability)) return false;
        replace_field(target.body, "event", "phantom_object");
        replace_field(target.body, "truth", "0");
        return true;
    }
    case AttackKind::SemanticTamper:
        throw IncompatibleAttackError("SemanticTamper applies to a feature, not a message");
    }
    throw IncompatibleAttackError("unknown attack kind");
}

bool verify_watermark(const SemanticFeature& f, double detection_prob, RngStream& rng) {
    if (!f.tampered) return true;
    return !rng.bernoulli(detection_prob);
}

} // namespace cetsim
