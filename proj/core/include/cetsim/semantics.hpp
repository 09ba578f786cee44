#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "cetsim/engine.hpp"
#include "cetsim/types.hpp"

namespace cetsim {

struct CodecSpec {
    Modality modality = Modality::RfPower;
    std::uint64_t raw_bytes = 1;
    double compression_ratio = 1.0; // in (0,1]
    double base_fidelity = 1.0;     // in (0,1]
};

/// Default codecs, one per modality, indexed by Modality value. Ratios are
/// chosen so the aggregate GFM upload lands near the 2 MB payload default.
std::array<CodecSpec, 4> default_codecs();
/// The same defaults as a vector, convenient for config structs.
std::vector<CodecSpec> default_codec_vector();
const CodecSpec& codec_for(std::span<const CodecSpec> codecs, Modality m);

enum class AttackKind : std::uint8_t { SemanticTamper, MaliciousRelay, CrossModalMislead };

std::string_view attack_kind_name(AttackKind k);

struct AttackSpec {
    AttackKind kind = AttackKind::SemanticTamper;
    double probability = 0.0; // in [0,1]
    double severity = 1.0;    // in (0,1], fidelity multiplier on success
};

class AllMissingError : public Error {
public:
    using Error::Error;
};
class AllZeroError : public Error {
public:
    using Error::Error;
};
class TooManyPointsError : public Error {
public:
    using Error::Error;
};
class ModalityMismatchError : public Error {
public:
    using Error::Error;
};
class IncompatibleAttackError : public Error {
public:
    using Error::Error;
};

/// RF power preprocessing: impute NaN entries with the mean of the finite
/// ones, then scale to [0,1] via (x-min)/(max-min). A constant sequence
/// maps to all zeros. Throws AllMissingError when no entry is finite.
std::vector<double> minmax_normalize(std::span<const double> seq);

using Vec3 = std::array<double, 3>;

/// Point-cloud preprocessing: subtract the centroid, divide by the max
/// post-centering norm, pad with zero vectors to target_count. A degenerate
/// cloud (all points identical) becomes all zeros.
std::vector<Vec3> unit_sphere_pad(std::span<const Vec3> points, std::size_t target_count);

/// mmWave IQ preprocessing: divide by the max magnitude so the output peak
/// magnitude is exactly 1. Throws AllZeroError when every entry is zero.
std::vector<std::complex<double>> normalize_iq(std::span<const std::complex<double>> iq);

/// Semantic encoding: payload = ceil(raw_bytes * ratio), fidelity = the
/// codec's base fidelity, fresh watermark.
SemanticFeature encode(Modality modality, const CodecSpec& codec, NodeId origin);

/// Applies the attack with its configured probability. Returns true when the
/// attack landed. SemanticTamper only; tampering scales fidelity by
/// severity and breaks the fragile watermark.
bool inject_attack(SemanticFeature& target, const AttackSpec& attack, RngStream& rng);

/// Message form: MaliciousRelay corrupts a Directive body (coordinates
/// rewritten, signature broken); CrossModalMislead falsifies a PeerAlert.
bool inject_attack(Message& target, const AttackSpec& attack, RngStream& rng);

/// Fragile-watermark check: untampered features are always accepted;
/// tampered ones are rejected with probability detection_prob.
bool verify_watermark(const SemanticFeature& f, double detection_prob, RngStream& rng);

} // namespace cetsim
