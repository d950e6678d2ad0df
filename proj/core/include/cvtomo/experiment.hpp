#pragma once

#include "cvtomo/fock.hpp"

// Composition of the Fock-basis primitives into the full heralded-state
// imperfection chain: squeezed vacuum generation, propagation losses, the
// subtraction tap, false-herald admixture and homodyne detection efficiency.

namespace cvtomo {

struct ExperimentParams {
    // Optical chain
    double initial_squeezing_db = -5.39;  // at generation, dB (<= 0)
    double eta_wg = 0.69;                 // source propagation + coupling
    double eta_s = 0.96;                  // post-tap transmission to the HD
    double tap_reflectivity = 0.05;       // subtraction tap (95:5)
    double eta_t = 0.94;                  // HD transmission
    double eta_pd = 0.80;                 // photodiode quantum efficiency
    double eta_el = 0.96;                 // electronic-noise equivalent efficiency

    // Heralding statistics
    double herald_rate_hz = 3000.0;
    double dark_rate_hz = 80.0;
    // Fraction of heralds that are false (detector dark counts). Negative
    // means "derive from the rates": dark_rate/herald_rate.
    double false_herald_fraction = -1.0;

    // Temporal/acquisition geometry
    double filter_gamma_over_pi_hz = 9.75e6;  // heralding filter FWHM γ/π
    double hd_bandwidth_hz = 300e6;           // homodyne detector bandwidth
    double sample_rate_hz = 1e9;
    double trace_duration_s = 5e-6;
    double phase_ramp_rad_per_s = 9.0 * M_PI;
    int n_traces = 10000;

    // Numerics
    int fock_dim = 20;
    std::uint64_t rng_seed = 12345;

    double eta_hd() const { return eta_t * eta_pd * eta_el; }
    double eta_tot() const { return eta_wg * eta_s * eta_hd(); }
    double false_fraction() const {
        return false_herald_fraction >= 0.0 ? false_herald_fraction
                                            : dark_rate_hz / herald_rate_hz;
    }

    // Throws std::invalid_argument on out-of-range efficiencies, rates or
    // geometry (including the Nyquist requirement sample_rate > 2·hd_bandwidth).
    void validate() const;
};

// The heralded non-Gaussian state after the full imperfection chain:
//   squeezed_vacuum(initial_squeezing_db)
//   -> apply_loss(eta_wg)
//   -> photon subtraction at the tap (annihilation-operator limit; the
//      reflectivity sets the heralding rate, not the conditional state shape)
//   -> mix with the unsubtracted same-loss state at false_herald_fraction
//   -> apply_loss(eta_s)
//   -> apply_loss(eta_hd) when include_detection is true.
// include_detection=false yields the state referred back to before the
// homodyne detector (the quantity detector-efficiency-corrected tomography
// reconstructs).
DensityMatrix heralded_state(const ExperimentParams& params, bool include_detection);

// Loss back-correction of a variance measured after transmission eta:
//   V_corr = (V_meas − (1−η)·V_vac)/η, in dB relative to vacuum.
// Throws std::invalid_argument for eta outside (0, 1] or when the measured
// variance does not exceed the (1−η) vacuum floor (unphysical measurement).
double loss_corrected_variance_db(double measured_db, double eta);

// Heralding signal-to-noise 10·log10((herald − dark)/dark).
// Throws std::invalid_argument when herald_rate <= dark_rate or dark_rate <= 0.
double snr_db(double herald_rate_hz, double dark_rate_hz);

// Companion helper: fraction of heralds that are dark counts.
double false_herald_fraction(double herald_rate_hz, double dark_rate_hz);

}  // namespace cvtomo
