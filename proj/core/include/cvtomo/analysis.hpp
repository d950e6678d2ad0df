#pragma once

#include "cvtomo/temporal_mode.hpp"
#include "cvtomo/tomography.hpp"
#include "cvtomo/traces.hpp"

#include <cstdint>
#include <vector>

// The measurement pipeline: shot-noise calibration, mode-projected quadrature
// extraction X = Σ f(t_k) x(t_k) Δt / shot, per-trace LO-phase estimation from
// the background squeezing modulation, and the phase-binned squeezing report.

namespace cvtomo {

struct AnalysisParams {
    double mode_window_s = 250e-9;   // heralded-mode window, ends at the herald
    int decimation = 8;              // block-average factor before analysis
    int margin_blocks = 6;           // guard band around the heralded window
    int n_background_records = 8;    // disjoint background slots per trace (left side)
    int phase_fit_halfwidth = 120;   // traces on each side in the local phase fit
    int min_background_slots = 100;  // minimum slots for per-trace variance
    int n_phase_bins = 36;           // squeezing-report bins over [0, pi)
    int bootstrap_samples = 200;     // uncertainty resampling count
    std::uint64_t bootstrap_seed = 0x626f6f74ULL;
    bool fitted_mode_extraction = true;  // project on the fitted exponential
};

struct SqueezingSummary {
    double sq_db = 0.0;
    double antisq_db = 0.0;
    double theta0_rad = 0.0;   // phase of minimum variance in [0, pi)
    double sq_err_db = 0.0;    // bootstrap one-sigma
    double antisq_err_db = 0.0;
    Eigen::VectorXd bin_variance;  // per-bin second moment (diagnostic)
    Eigen::VectorXi bin_count;
};

struct AnalysisResult {
    TemporalMode measured_mode;    // top autocorrelation eigenvector (block grid)
    TemporalMode extraction_mode;  // mode actually used for projections
    Eigen::VectorXd mode_spectrum;
    ModeFit mode_fit;
    double shot_scale = 1.0;
    int window_blocks = 0;
    std::vector<double> est_phase_rad;  // per trace, mod pi
    bool phases_from_ramp_fallback = false;  // no measurable modulation; used nominal ramp
    double phase_rms_rad = -1.0;        // vs synthetic truth; -1 when unknown
    std::vector<QuadratureRecord> heralded_records;
    std::vector<QuadratureRecord> background_records;
    SqueezingSummary squeezing;  // from background records
};

// X = Σ f(t_k)·x(t_k)·Δt / shot_scale at full sample rate; the mode grid is
// anchored with t = 0 at the trace's herald sample.
double extract_quadrature(const HomodyneTrace& trace, const TemporalMode& mode,
                          double shot_scale);

// Block-grid variant: project the mode onto the window of blocks ending at
// end_block (inclusive). The mode length must match the implied window.
double extract_block_quadrature(const Eigen::MatrixXd& blocks, int row, int end_block,
                                const TemporalMode& mode, double shot_scale);

// Scale factor mapping raw vacuum-trace projections to variance 1/2, pooled
// over every available mode-length slot of every calibration trace.
double calibrate_shot_noise(const DecimatedEnsemble& calibration, const TemporalMode& mode);
double calibrate_shot_noise(const std::vector<HomodyneTrace>& calibration,
                            const TemporalMode& mode, int decimation);

// Per-trace LO phase from the squeezing modulation of background variance.
// Each trace's variance over mode slots in [bg_begin, bg_end) is fitted
// locally (across neighbouring traces) to V(θ) = c0 − M·cos 2θ with the known
// per-trace phase increment; returns phases mod pi. Throws when the
// modulation is indistinguishable from estimator noise.
std::vector<double> estimate_phases(const DecimatedEnsemble& ens, const TemporalMode& mode,
                                    int bg_begin_block, int bg_end_block,
                                    double rad_per_trace, int fit_halfwidth = 120,
                                    int min_slots = 100);
std::vector<double> estimate_phases(const TraceSet& set, const TemporalMode& mode,
                                    double window_begin_s, double window_end_s,
                                    int decimation = 8);

// Phase-binned sinusoidal variance fit; dB relative to the vacuum 1/2.
SqueezingSummary squeezing_report(const std::vector<QuadratureRecord>& records,
                                  int n_phase_bins = 36, int bootstrap_samples = 200,
                                  std::uint64_t seed = 0x626f6f74ULL);

// Full pipeline on a trace set: decimate, autocorrelation mode, exponential
// fit, shot calibration, phase estimation, record extraction, squeezing fit.
AnalysisResult analyze_traces(const TraceSet& set, const AnalysisParams& params);

}  // namespace cvtomo
