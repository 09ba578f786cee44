#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "cetsim/netmodel.hpp"
#include "cetsim/semantics.hpp"
#include "cetsim/types.hpp"

namespace cetsim {

struct ComputeCost {
    double flops_g = 0.0;     // GFLOPs per sample
    double memory_mb = 0.0;   // peak MB
    double inference_s = 0.0; // seconds per sample
};

/// Parameters of the analytic accuracy model
///   acc(v, s, snr) = c + (A(v,s) - c) * sigmoid((snr - midpoint)/slope)
/// with chance level c = 1/num_beams.
struct QualityParams {
    std::map<std::pair<ModeVariant::Id, Scenario>, double> peak_accuracy;
    std::uint32_t num_beams = 64;
    double midpoint_db = 5.0;
    double slope_db = 5.0;

    double chance() const { return 1.0 / static_cast<double>(num_beams); }
};

class CalibrationError : public Error {
public:
    CalibrationError(std::string message, int line = 0, std::string constraint = {})
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
          line_(line), constraint_(std::move(constraint)) {}
    int line() const { return line_; }
    /// Name of the violated load-time constraint, empty for parse errors.
    const std::string& constraint() const { return constraint_; }

private:
    int line_;
    std::string constraint_;
};

class MissingVariantError : public CalibrationError {
public:
    using CalibrationError::CalibrationError;
};

struct ConstraintReport {
    std::string name;
    bool passed = false;
    std::string detail;
};

class CalibrationTable {
public:
    /// Parses and validates a calibration file; throws CalibrationError with
    /// a line-numbered diagnostic on parse failure and a named constraint on
    /// validation failure.
    static CalibrationTable load(const std::string& path);
    static CalibrationTable parse(std::string_view text, std::string source_name = "<memory>");
    /// Parse without the validation gate; used by the validator to report
    /// every constraint instead of stopping at the first violation.
    static CalibrationTable parse_unchecked(std::string_view text,
                                            std::string source_name = "<memory>");

    /// The compiled-in copy of the shipped default file.
    static const CalibrationTable& builtin_default();

    const ComputeCost& compute_cost(ModeVariant v) const;
    double peak_accuracy(ModeVariant v, Scenario s) const;
    const QualityParams& quality() const { return quality_; }

    /// Runs every invariant and returns one report per constraint; used by
    /// the validate-calibration command. validate() throws on first failure.
    std::vector<ConstraintReport> check_constraints() const;
    void validate() const;

    const std::string& source() const { return source_; }
    const std::string& content_hash() const { return hash_; }

private:
    std::map<ModeVariant::Id, ComputeCost> costs_;
    QualityParams quality_;
    std::string source_;
    std::string hash_; // FNV-1a over the file bytes, hex
};

/// Exact table lookup of the per-variant compute cost.
inline const ComputeCost& compute_cost(ModeVariant v, const CalibrationTable& t) {
    return t.compute_cost(v);
}

/// Logistic accuracy model; strictly increasing in snr_db, approaching the
/// chance level as snr -> -inf and the variant's peak as snr -> +inf.
double sensing_accuracy(ModeVariant v, Scenario s, double snr_db, const CalibrationTable& t);

/// Couples feature fidelity to the quality model: the above-chance margin is
/// scaled by the product of the accepted features' fidelities. Rejected
/// features must be excluded by the caller; the product runs over accepted
/// features only.
double effective_accuracy(double base, std::span<const SemanticFeature> accepted_features,
                          double chance);

struct LatencyBreakdown {
    double inference_s = 0.0;
    double transmission_s = 0.0;
    double total_s = 0.0;
};

/// Per-round latency budget of a variant's characteristic flow:
///   GFM: aggregated feature upload terminal -> edge -> cloud
///   CRM: cue feature to the edge + directive relayed to the guided peer
///   PIM: local inference + one-hop peer alert
/// Throws NoRouteError if a required link is down.
LatencyBreakdown total_latency(ModeVariant v, const Topology& topo, const CalibrationTable& t,
                               std::span<const CodecSpec> codecs,
                               std::uint64_t alert_payload_bytes = 2048);

LatencyBreakdown total_latency(ModeVariant v, const Topology& topo, const CalibrationTable& t);

/// CRM roles: the cue modality (camera-like percept relayed to the edge) and
/// the guided modality (the sensor the directive steers).
Modality crm_cue_modality(ModeVariant v);
Modality crm_guided_modality(ModeVariant v);

} // namespace cetsim
