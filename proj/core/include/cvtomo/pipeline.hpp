#pragma once

#include "cvtomo/analysis.hpp"
#include "cvtomo/run_config.hpp"
#include "cvtomo/tomography.hpp"

#include <iosfwd>
#include <string>
#include <vector>

// End-to-end drivers behind the CLI subcommands. Each driver writes its
// artifacts into config.output_dir (created if needed), embeds the full
// configuration in every JSON output, and returns the paths it wrote.

namespace cvtomo {

struct SimulateOutput {
    std::string traces_path;       // traces.hqtr
    std::string calibration_path;  // calibration.hqtr
    std::string summary_path;      // simulate.json
};

struct AnalyzeOutput {
    std::string mode_path;        // mode.csv: block times, measured and fitted mode
    std::string spectrum_path;    // spectrum.csv: autocorrelation eigenvalues
    std::string records_path;     // records.csv: heralded (x, theta, trace) records
    std::string background_path;  // background_records.csv
    std::string summary_path;     // analyze.json
    AnalysisResult result;
};

struct TomoOutput {
    std::string rho_path;     // rho.json: dim + row-major real/imag parts
    std::string loglik_path;  // loglik.csv
    double w_origin = 0.0;
    TomographyResult result;
};

struct ReportOutput {
    std::string wigner_path;   // wigner.csv: header row x, first column p
    std::string summary_path;  // report.json
    double w_origin = 0.0;
};

SimulateOutput run_simulate(const RunConfig& config);
AnalyzeOutput run_analyze(const RunConfig& config, const std::string& traces_path,
                          const std::string& calibration_path);
TomoOutput run_tomo(const RunConfig& config, const std::string& records_path);
ReportOutput run_report(const RunConfig& config, const std::string& rho_path);

// Record-file plumbing shared by analyze → tomo (CSV: x,theta,trace_index).
void write_records_csv(const std::string& path,
                       const std::vector<QuadratureRecord>& records);
std::vector<QuadratureRecord> read_records_csv(const std::string& path);

// Density-matrix JSON used between tomo and report.
void write_density_matrix_json(const std::string& path, const DensityMatrix& rho,
                               double eta, const RunConfig& config, double loglik_final,
                               int iterations);
DensityMatrix read_density_matrix_json(const std::string& path, double* eta_out = nullptr);

// The full desk-scale acceptance suite with fixed seeds; prints one
// pass/fail line per criterion to `log` and returns overall success.
bool run_acceptance(std::ostream& log);

}  // namespace cvtomo
