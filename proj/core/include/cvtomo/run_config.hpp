#pragma once

#include "cvtomo/analysis.hpp"
#include "cvtomo/experiment.hpp"

#include <string>

// Flat key-value run configuration ("section.key = value", '#' comments).
// Defaults reproduce the experiment's published operating point; unknown keys
// are rejected so typos cannot silently fall back to defaults.

namespace cvtomo {

struct TomoParams {
    int dim = 20;
    int iterations = 200;
    int n_phase_bins = 60;
    double x_max = 6.0;
    double x_bin_width = 0.1;
    std::string eta_correction = "none";  // "none" or "hd"
};

struct GridParams {
    double half_extent = 5.0;  // Wigner grid spans [-half_extent, half_extent]
    int points = 201;          // per axis
};

struct ReportParams {
    bool include_projection = true;    // also report the improved-coupling variant
    double projection_eta_wg = 0.97;   // waveguide efficiency for that variant
};

struct RunConfig {
    ExperimentParams experiment;
    int n_calibration_traces = 2000;
    AnalysisParams analysis;
    TomoParams tomo;
    GridParams grid;
    ReportParams report;
    std::string output_dir = "out";

    void validate() const;  // throws std::invalid_argument
};

// Parse config text / file. Unknown keys, malformed lines and out-of-range
// values all throw std::invalid_argument (with the offending key in the
// message); an unreadable file throws std::invalid_argument as well, since a
// bad --config path is caller input.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

// Canonical text form; parse_run_config(serialize_run_config(c)) == c.
std::string serialize_run_config(const RunConfig& config);

}  // namespace cvtomo
