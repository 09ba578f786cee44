#pragma once

#include <map>
#include <string>
#include <vector>

#include "cetsim/experiment.hpp"
#include "cetsim/types.hpp"

namespace cetsim {

class SchemaError : public Error {
public:
    using Error::Error;
};

struct ResultRow {
    ModeVariant variant = ModeVariant::from_id(ModeVariant::Id::Gfm);
    Scenario scenario = Scenario::Daytime;
    double snr_db = 0.0;
    std::uint64_t seed = 0;
    std::uint32_t round = 0;
    double accuracy = 0.0;
    double inference_ms = 0.0;
    double transmission_ms = 0.0;
    double total_ms = 0.0;
    double flops_g = 0.0;
    double memory_mb = 0.0;
    std::uint64_t bytes_tx = 0;
    int attacks_hit = 0;
    int defenses_hit = 0;
};

/// Parses results.csv; throws SchemaError if the header is not exactly the
/// simulate output schema or a row is malformed.
std::vector<ResultRow> read_results_csv(const std::string& path);

/// Accuracy-vs-SNR chart, one labeled polyline per variant, in canonical
/// variant order. Deterministic output for identical input.
std::string render_accuracy_svg(const std::vector<ResultRow>& rows, Scenario scenario);

/// Per-variant mean complexity columns, Table-style:
/// "variant,flops_g,memory_mb,inference_latency_ms".
std::string render_complexity_csv(const std::vector<ResultRow>& rows);

/// Writes accuracy_vs_snr_<scenario>.svg per scenario present in the rows
/// plus complexity_table.csv into out_dir. Returns the file names written.
std::vector<std::string> write_plots(const std::vector<ResultRow>& rows,
                                     const std::string& out_dir);

} // namespace cetsim
