#include "cvtomo/experiment.hpp"

#include <doctest.h>

#include <cmath>

using namespace cvtomo;

namespace {

// The published operating point quotes the detector efficiency as the single
// product 0.72; fold it into one factor so comparisons are exact.
ExperimentParams quoted_params() {
    ExperimentParams p;
    p.eta_t = 1.0;
    p.eta_pd = 1.0;
    p.eta_el = 0.72;
    return p;
}

}  // namespace

TEST_CASE("derived efficiencies and herald statistics") {
    const ExperimentParams p;
    CHECK(p.eta_hd() == doctest::Approx(0.94 * 0.80 * 0.96).epsilon(1e-15));
    CHECK(p.eta_hd() == doctest::Approx(0.72192).epsilon(1e-12));
    CHECK(p.eta_tot() == doctest::Approx(0.69 * 0.96 * 0.72192).epsilon(1e-12));
    CHECK(p.false_fraction() == doctest::Approx(80.0 / 3000.0).epsilon(1e-15));

    ExperimentParams q = p;
    q.false_herald_fraction = 0.1;
    CHECK(q.false_fraction() == doctest::Approx(0.1));

    CHECK(snr_db(3000.0, 80.0) == doctest::Approx(10.0 * std::log10(2920.0 / 80.0)));
    CHECK(snr_db(3000.0, 80.0) == doctest::Approx(15.623).epsilon(1e-4));
    CHECK_THROWS_AS(snr_db(80.0, 80.0), std::invalid_argument);
    CHECK_THROWS_AS(snr_db(3000.0, 0.0), std::invalid_argument);
    CHECK(false_herald_fraction(3000.0, 80.0) == doctest::Approx(80.0 / 3000.0));
}

TEST_CASE("parameter validation") {
    ExperimentParams p;
    CHECK_NOTHROW(p.validate());

    SUBCASE("efficiencies must lie in (0, 1]") {
        p.eta_wg = 1.2;
        CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    }
    SUBCASE("Nyquist: sample rate must exceed twice the detector bandwidth") {
        p.sample_rate_hz = 500e6;
        CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    }
    SUBCASE("herald rate must exceed the dark rate") {
        p.dark_rate_hz = 5000.0;
        CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    }
    SUBCASE("positive squeezing is rejected") {
        p.initial_squeezing_db = 0.5;
        CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    }
    SUBCASE("trace count must be positive") {
        p.n_traces = 0;
        CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    }
}

TEST_CASE("heralded state Wigner-origin values, frozen") {
    // Oracle values from an independent implementation of the chain
    // (hyperbolic-expansion squeezed vacuum, binomial loss Kraus operators,
    // annihilation subtraction, convex dark-count admixture).
    const ExperimentParams p = quoted_params();

    const double w_det = wigner_origin(heralded_state(p, true));
    CHECK(w_det == doctest::Approx(0.015397).epsilon(2e-4));

    const double w_corr = wigner_origin(heralded_state(p, false));
    CHECK(w_corr == doctest::Approx(-0.054189).epsilon(2e-4));

    ExperimentParams proj = p;
    proj.eta_wg = 0.97;
    CHECK(wigner_origin(heralded_state(proj, false)) ==
          doctest::Approx(-0.220047).epsilon(2e-4));

    // Full default decomposition (eta_hd = 0.72192) shifts the detected
    // value only slightly.
    CHECK(wigner_origin(heralded_state(ExperimentParams{}, true)) ==
          doctest::Approx(0.014938).epsilon(2e-4));
}

TEST_CASE("heralded state structure") {
    const ExperimentParams p;
    const DensityMatrix det = heralded_state(p, true);
    const DensityMatrix corr = heralded_state(p, false);
    CHECK_NOTHROW(check_state(det));
    CHECK_NOTHROW(check_state(corr));

    // Detection loss washes out the negativity and scales the mean photon
    // number by exactly eta_hd.
    CHECK(wigner_origin(det) > wigner_origin(corr));
    CHECK(mean_photon_number(det) ==
          doctest::Approx(p.eta_hd() * mean_photon_number(corr)).epsilon(1e-12));

    SUBCASE("dark-count fraction interpolates toward the Gaussian background") {
        ExperimentParams clean = p;
        clean.false_herald_fraction = 0.0;
        ExperimentParams dark = p;
        dark.false_herald_fraction = 1.0;
        const double w_clean = wigner_origin(heralded_state(clean, false));
        const double w_mixed = wigner_origin(heralded_state(p, false));
        const double w_dark = wigner_origin(heralded_state(dark, false));
        CHECK(w_clean < w_mixed);
        CHECK(w_mixed < w_dark);
        CHECK(w_dark > 0.0);  // all-false heralds leave a Gaussian state
    }

    SUBCASE("false fraction is an exact convex combination") {
        ExperimentParams clean = p;
        clean.false_herald_fraction = 0.0;
        ExperimentParams dark = p;
        dark.false_herald_fraction = 1.0;
        ExperimentParams half = p;
        half.false_herald_fraction = 0.5;
        const DensityMatrix blend =
            0.5 * heralded_state(clean, true) + 0.5 * heralded_state(dark, true);
        CHECK((heralded_state(half, true) - blend).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("loss-corrected variance arithmetic") {
    // Published operating point: -1.80 dB measured, eta = 0.48 total.
    CHECK(loss_corrected_variance_db(-1.80, 0.48) == doctest::Approx(-5.3297).epsilon(2e-4));
    CHECK(loss_corrected_variance_db(3.36, 0.48) == doctest::Approx(5.3564).epsilon(2e-4));
    // Near-mirror: squeezing and antisqueezing correct to almost symmetric values.
    CHECK(std::abs(loss_corrected_variance_db(3.36, 0.48) +
                   loss_corrected_variance_db(-1.80, 0.48)) < 0.1);

    // eta = 1 is the identity.
    CHECK(loss_corrected_variance_db(-2.5, 1.0) == doctest::Approx(-2.5).epsilon(1e-12));

    // Round trip with the forward loss map V -> eta V + (1-eta)/2.
    const double eta = 0.48;
    const double v_in = db_to_variance(-5.39);
    const double v_meas = eta * v_in + (1 - eta) * 0.5;
    CHECK(loss_corrected_variance_db(variance_to_db(v_meas), eta) ==
          doctest::Approx(-5.39).epsilon(1e-10));

    // Measurements at or below the (1-eta) vacuum floor are unphysical.
    CHECK_THROWS_AS(loss_corrected_variance_db(-3.2, 0.48), std::invalid_argument);
    CHECK_THROWS_AS(loss_corrected_variance_db(-1.80, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(loss_corrected_variance_db(-1.80, 1.2), std::invalid_argument);
}
