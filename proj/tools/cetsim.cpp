// cetsim: experiment runner for the cloud-edge-terminal multimodal sensing
// simulator.
//
//   cetsim simulate --config <path> --out <dir> [--seed <u64>] [--sample-outcomes]
//   cetsim plot --in <results.csv> --out <dir>
//   cetsim validate-calibration <path>
//
// Exit codes: 0 success, 2 config/schema error, 3 calibration validation
// failure.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cetsim/calibration.hpp"
#include "cetsim/experiment.hpp"
#include "cetsim/report.hpp"

namespace {

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 const cetsim::SimulateOptions& opts) {
    cetsim::ExperimentConfig cfg;
    try {
        cfg = cetsim::ExperimentConfig::parse_file(config_path);
    } catch (const cetsim::ConfigError& e) {
        std::cerr << "config error: " << config_path << ": " << e.what() << "\n";
        return 2;
    }
    try {
        const std::size_t rows = cetsim::run_experiment(cfg, out_dir, opts);
        std::cout << "wrote " << rows << " rows to " << out_dir << "/results.csv\n";
        return 0;
    } catch (const cetsim::CalibrationError& e) {
        std::cerr << "calibration error: " << e.what() << "\n";
        return 3;
    } catch (const cetsim::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int cmd_plot(const std::string& results_path, const std::string& out_dir) {
    try {
        const auto rows = cetsim::read_results_csv(results_path);
        const auto written = cetsim::write_plots(rows, out_dir);
        for (const std::string& f : written) std::cout << "wrote " << out_dir << "/" << f << "\n";
        return 0;
    } catch (const cetsim::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 2;
    } catch (const cetsim::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int cmd_validate_calibration(const std::string& path) {
    std::string first_violation;
    try {
        // Parse without the load-time gate so every constraint is reported.
        std::FILE* f = std::fopen(path.c_str(), "rb");
        if (!f) {
            std::cerr << "cannot open " << path << "\n";
            return 3;
        }
        std::string text;
        char buf[4096];
        std::size_t n;
        while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) text.append(buf, n);
        std::fclose(f);

        cetsim::CalibrationTable table;
        try {
            table = cetsim::CalibrationTable::parse_unchecked(text, path);
        } catch (const cetsim::CalibrationError& e) {
            std::cerr << "parse error: " << path << ": " << e.what() << "\n";
            return 3;
        }
        for (const cetsim::ConstraintReport& r : table.check_constraints()) {
            std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
            if (!r.passed && !r.detail.empty()) std::cout << " (" << r.detail << ")";
            std::cout << "\n";
            if (!r.passed && first_violation.empty()) first_violation = r.name;
        }
    } catch (const cetsim::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    if (!first_violation.empty()) {
        std::cerr << "calibration invalid: " << first_violation << "\n";
        return 3;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cloud-edge-terminal multimodal sensing simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", results_path, calib_path;
    cetsim::SimulateOptions opts;
    std::uint64_t seed = 0;
    bool seed_set = false;

    auto* simulate = app.add_subcommand("simulate", "run an experiment sweep");
    simulate->add_option("--config", config_path, "experiment config file")->required();
    simulate->add_option("--out", out_dir, "output directory");
    auto* seed_opt = simulate->add_option("--seed", seed, "seed override");
    simulate->add_flag("--sample-outcomes", opts.sample_outcomes,
                       "report sampled 0/1 outcomes instead of success probabilities");
    simulate->add_option("--threads", opts.threads, "worker pool cap (default CETSIM_THREADS)");

    auto* plot = app.add_subcommand("plot", "render charts from results.csv");
    plot->add_option("--in", results_path, "results.csv path")->required();
    plot->add_option("--out", out_dir, "output directory");

    auto* validate = app.add_subcommand("validate-calibration", "check a calibration file");
    validate->add_option("path", calib_path, "calibration file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    seed_set = seed_opt->count() > 0;
    if (seed_set) opts.seed_override = seed;

    if (simulate->parsed()) return cmd_simulate(config_path, out_dir, opts);
    if (plot->parsed()) return cmd_plot(results_path, out_dir);
    if (validate->parsed()) return cmd_validate_calibration(calib_path);
    return 1;
}
