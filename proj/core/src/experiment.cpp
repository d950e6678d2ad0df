#include "cvtomo/experiment.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cvtomo {

namespace {

void check_unit_interval(double v, const char* name) {
    if (v < 0.0 || v > 1.0) {
        throw std::invalid_argument(std::string(name) + " must lie in [0, 1], got " +
                                    std::to_string(v));
    }
}

}  // namespace

void ExperimentParams::validate() const {
    if (initial_squeezing_db > 0.0) {
        throw std::invalid_argument("initial_squeezing_db must be <= 0");
    }
    check_unit_interval(eta_wg, "eta_wg");
    check_unit_interval(eta_s, "eta_s");
    check_unit_interval(eta_t, "eta_t");
    check_unit_interval(eta_pd, "eta_pd");
    check_unit_interval(eta_el, "eta_el");
    if (tap_reflectivity <= 0.0 || tap_reflectivity >= 1.0) {
        throw std::invalid_argument("tap_reflectivity must lie in (0, 1)");
    }
    if (herald_rate_hz <= 0.0 || dark_rate_hz < 0.0) {
        throw std::invalid_argument("herald/dark rates must be positive");
    }
    if (dark_rate_hz >= herald_rate_hz) {
        // Otherwise every herald is noise and the false-click fraction is >= 1.
        throw std::invalid_argument("dark_rate_hz must stay below herald_rate_hz");
    }
    if (false_herald_fraction > 1.0) {
        throw std::invalid_argument("false_herald_fraction must lie in [0, 1]");
    }
    if (filter_gamma_over_pi_hz <= 0.0) {
        throw std::invalid_argument("filter_gamma_over_pi_hz must be > 0");
    }
    if (hd_bandwidth_hz <= 0.0 || sample_rate_hz <= 0.0) {
        throw std::invalid_argument("bandwidth and sample rate must be > 0");
    }
    if (sample_rate_hz <= 2.0 * hd_bandwidth_hz) {
        throw std::invalid_argument(
            "sample_rate_hz must exceed 2x hd_bandwidth_hz (Nyquist)");
    }
    if (trace_duration_s <= 0.0) {
        throw std::invalid_argument("trace_duration_s must be > 0");
    }
    if (n_traces < 1) throw std::invalid_argument("n_traces must be >= 1");
    if (fock_dim < 4) throw std::invalid_argument("fock_dim must be >= 4");
}

DensityMatrix heralded_state(const ExperimentParams& params, bool include_detection) {
    params.validate();
    DensityMatrix sqz = squeezed_vacuum(params.initial_squeezing_db, params.fock_dim);
    DensityMatrix before_tap = apply_loss(sqz, params.eta_wg);

    // False heralds (dark counts): the optical state merely crossed the tap,
    // losing the reflected fraction.
    DensityMatrix unsubtracted = apply_loss(before_tap, 1.0 - params.tap_reflectivity);

    DensityMatrix heralded;
    if (params.false_fraction() >= 1.0) {
        // Every herald is false: no subtraction ever happens (and none may be
        // attempted — a vacuum input has no photon to remove).
        heralded = unsubtracted;
    } else {
        // True heralds: photon subtraction in the small-reflectivity
        // (annihilation-operator) limit. The tap reflectivity governs how often
        // the herald fires, not the shape of the conditional state in this
        // limit, so the conditional state is a·ρ·a†, normalized.
        DensityMatrix subtracted = annihilate(before_tap);
        heralded = mix(subtracted, unsubtracted, params.false_fraction());
    }
    heralded = apply_loss(heralded, params.eta_s);
    if (include_detection) {
        heralded = apply_loss(heralded, params.eta_hd());
    }
    return heralded;
}

double loss_corrected_variance_db(double measured_db, double eta) {
    if (eta <= 0.0 || eta > 1.0) {
        throw std::invalid_argument("loss_corrected_variance_db: eta must lie in (0, 1]");
    }
    const double v_vac = 0.5;
    double v_meas = db_to_variance(measured_db);
    double v_floor = (1.0 - eta) * v_vac;
    if (v_meas <= v_floor) {
        throw std::invalid_argument(
            "loss_corrected_variance_db: measured variance at or below the (1-eta) "
            "vacuum floor; unphysical for transmission " + std::to_string(eta));
    }
    double v_corr = (v_meas - v_floor) / eta;
    return variance_to_db(v_corr);
}

double snr_db(double herald_rate_hz, double dark_rate_hz) {
    if (dark_rate_hz <= 0.0) {
        throw std::invalid_argument("snr_db: dark rate must be > 0");
    }
    if (herald_rate_hz <= dark_rate_hz) {
        throw std::invalid_argument("snr_db: herald rate must exceed dark rate");
    }
    return 10.0 * std::log10((herald_rate_hz - dark_rate_hz) / dark_rate_hz);
}

double false_herald_fraction(double herald_rate_hz, double dark_rate_hz) {
    if (herald_rate_hz <= 0.0 || dark_rate_hz < 0.0) {
        throw std::invalid_argument("false_herald_fraction: rates must be positive");
    }
    return dark_rate_hz / herald_rate_hz;
}

}  // namespace cvtomo
