#include "cvtomo/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

// Command-line front end. Exit codes: 0 on success, 2 for configuration or
// usage problems (bad flags, malformed config, out-of-range values), 1 for
// runtime failures (missing or corrupt data files, I/O errors, estimators
// that cannot produce a result).

namespace {

namespace fs = std::filesystem;

std::string default_path(const cvtomo::RunConfig& config, const char* name) {
    return (fs::path(config.output_dir) / name).string();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cvtomo: simulation and tomography of heralded homodyne runs"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "Run-configuration file (key = value lines)")
        ->option_text("PATH");
    auto* seed_opt =
        app.add_option("--seed", seed, "Override numerics.rng_seed")->option_text("N");
    auto* out_opt =
        app.add_option("--out", out_dir, "Override output.dir")->option_text("DIR");

    auto* cmd_simulate =
        app.add_subcommand("simulate", "Generate heralded and calibration traces");
    auto* cmd_analyze = app.add_subcommand(
        "analyze", "Extract temporal mode, phases and quadrature records from traces");
    auto* cmd_tomo =
        app.add_subcommand("tomo", "Maximum-likelihood reconstruction from records");
    auto* cmd_report =
        app.add_subcommand("report", "Wigner map and figures of merit from a density matrix");
    auto* cmd_selftest =
        app.add_subcommand("selftest", "Run the full desk-scale acceptance suite");
    for (auto* sub : {cmd_simulate, cmd_analyze, cmd_tomo, cmd_report, cmd_selftest}) {
        sub->fallthrough();
    }

    std::string traces_path, calibration_path, records_path, rho_path, eta_correction;
    cmd_analyze->add_option("--traces", traces_path, "Signal trace file (default <out>/traces.hqtr)")
        ->option_text("PATH");
    cmd_analyze
        ->add_option("--calibration", calibration_path,
                     "Vacuum calibration trace file (default <out>/calibration.hqtr)")
        ->option_text("PATH");
    cmd_tomo
        ->add_option("--records", records_path,
                     "Quadrature record CSV (default <out>/records.csv)")
        ->option_text("PATH");
    auto* eta_opt = cmd_tomo
                        ->add_option("--eta-correction", eta_correction,
                                     "Efficiency embedded in the measurement model")
                        ->check(CLI::IsMember({"none", "hd"}));
    cmd_report
        ->add_option("--rho", rho_path, "Density-matrix JSON (default <out>/rho.json)")
        ->option_text("PATH");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        cvtomo::RunConfig config;
        if (!config_path.empty()) config = cvtomo::load_run_config(config_path);
        if (*seed_opt) config.experiment.rng_seed = seed;
        if (*out_opt) config.output_dir = out_dir;
        if (*eta_opt) config.tomo.eta_correction = eta_correction;
        config.validate();

        if (app.got_subcommand(cmd_simulate)) {
            const cvtomo::SimulateOutput out = cvtomo::run_simulate(config);
            std::cout << "wrote " << out.traces_path << "\n"
                      << "wrote " << out.calibration_path << "\n"
                      << "wrote " << out.summary_path << "\n";
        } else if (app.got_subcommand(cmd_analyze)) {
            if (traces_path.empty()) traces_path = default_path(config, "traces.hqtr");
            if (calibration_path.empty())
                calibration_path = default_path(config, "calibration.hqtr");
            const cvtomo::AnalyzeOutput out =
                cvtomo::run_analyze(config, traces_path, calibration_path);
            std::cout << "wrote " << out.mode_path << "\n"
                      << "wrote " << out.spectrum_path << "\n"
                      << "wrote " << out.records_path << " ("
                      << out.result.heralded_records.size() << " records)\n"
                      << "wrote " << out.background_path << "\n"
                      << "wrote " << out.summary_path << "\n";
        } else if (app.got_subcommand(cmd_tomo)) {
            if (records_path.empty()) records_path = default_path(config, "records.csv");
            const cvtomo::TomoOutput out = cvtomo::run_tomo(config, records_path);
            std::cout << "wrote " << out.rho_path << "\n"
                      << "wrote " << out.loglik_path << " (" << out.result.iterations
                      << " iterations)\n"
                      << "Wigner origin: " << out.w_origin << "\n";
        } else if (app.got_subcommand(cmd_report)) {
            if (rho_path.empty()) rho_path = default_path(config, "rho.json");
            const cvtomo::ReportOutput out = cvtomo::run_report(config, rho_path);
            std::cout << "wrote " << out.wigner_path << "\n"
                      << "wrote " << out.summary_path << "\n"
                      << "Wigner origin: " << out.w_origin << "\n";
        } else if (app.got_subcommand(cmd_selftest)) {
            return cvtomo::run_acceptance(std::cout) ? 0 : 1;
        }
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
