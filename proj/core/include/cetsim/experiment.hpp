#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cetsim/calibration.hpp"
#include "cetsim/controller.hpp"
#include "cetsim/netmodel.hpp"
#include "cetsim/protocols.hpp"
#include "cetsim/types.hpp"

namespace cetsim {

class ConfigError : public Error {
public:
    ConfigError(std::string message, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

struct TerminalSpec {
    std::string label;
    std::vector<Modality> sensors;
};

/// Declarative experiment description; parses from a single INI-style text
/// file. Unknown keys are rejected with a line-numbered diagnostic.
struct ExperimentConfig {
    // [topology]
    std::vector<TerminalSpec> terminals; // empty -> default t1/t2/t3 layout
    Topology::LinkDefaults links;

    // [codec]
    std::vector<CodecSpec> codecs = default_codec_vector();
    std::uint64_t alert_payload_bytes = 2048;

    // [attack]
    std::vector<AttackSpec> attacks; // zero-probability entries are kept
    DefenseConfig defenses;

    // [experiment]
    std::string calibration = "builtin"; // path or "builtin"
    std::vector<Scenario> scenarios{Scenario::Daytime, Scenario::Nighttime};
    std::vector<double> snr_db{0, 5, 10, 15, 20, 25};
    std::vector<ModeVariant> variants{ModeVariant::all().begin(), ModeVariant::all().end()};
    bool auto_select = false; // variants = auto -> controller-driven
    std::uint32_t rounds_per_point = 12;
    std::uint64_t seed = 42;
    double budget_s = 1.0;      // auto-selection latency budget
    double min_accuracy = 0.0;  // auto-selection accuracy floor

    static ExperimentConfig parse_file(const std::string& path);
    static ExperimentConfig parse(std::string_view text);

    Topology build_topology() const;
    CalibrationTable load_calibration() const;

    /// The config re-serialized with every parameter resolved; itself a
    /// valid config file, so a run can be reproduced from its manifest.
    std::string resolved_text(const CalibrationTable& table) const;
};

struct SimulateOptions {
    std::optional<std::uint64_t> seed_override;
    bool sample_outcomes = false;
    /// Worker cap; 0 means use CETSIM_THREADS or 1.
    unsigned threads = 0;
};

inline constexpr const char* kResultsHeader =
    "mode,variant,scenario,snr_db,seed,round,accuracy,inference_ms,transmission_ms,"
    "total_ms,flops_g,memory_mb,bytes_tx,attacks_hit,defenses_hit";

/// Runs every sweep point and writes results.csv plus the run manifest into
/// out_dir. Returns the number of CSV rows written.
std::size_t run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                           const SimulateOptions& opts = {});

} // namespace cetsim
