#pragma once

#include "cvtomo/traces.hpp"

#include <Eigen/Dense>
#include <utility>
#include <vector>

// Temporal-mode estimation for the heralded wavepacket. The herald filter's
// single-pole response imprints a rising exponential f(t) ∝ e^{γt}·u(-t)
// (herald at t = 0) on the signal; the mode is recovered as the dominant
// eigenvector of the raw second-moment matrix over a window ending at the
// herald, then summarised by a fitted decay constant.

namespace cvtomo {

struct TemporalMode {
    Eigen::VectorXd t_grid;  // seconds, strictly increasing, uniform spacing
    Eigen::VectorXd values;  // normalised so that sum(f^2)·dt = 1
    double fwhm_hz = 0.0;    // spectral FWHM = gamma/pi for an exponential

    double dt() const { return t_grid.size() > 1 ? t_grid[1] - t_grid[0] : 0.0; }
    int size() const { return static_cast<int>(values.size()); }
};

// Analytic mode: f(t) = sqrt(2γ)·e^{γ(t-t0)} for t <= t0, zero after, sampled
// on t_grid and renormalised discretely. The grid must reach at least eight
// decay constants below t0 so the truncated tail is negligible.
TemporalMode temporal_mode(double gamma_per_s, const Eigen::VectorXd& t_grid, double t0_s = 0.0);

struct ModeFit {
    double gamma_per_s = 0.0;
    double t0_s = 0.0;            // fitted support edge
    double fwhm_hz = 0.0;         // gamma/pi
    double residual = 0.0;        // 1 - overlap^2 between mode and best fit
    bool non_exponential = false; // residual above the warning threshold
};

// Least-squares fit of a causal exponential to a measured mode. Amplitude is
// profiled out, which reduces the fit to maximising the normalised overlap
// with e^{γt} over the mode support; γ is found by golden-section search on
// log γ. residual = 1 - overlap².
ModeFit fit_exponential_mode(const TemporalMode& mode);

// Raw second-moment matrix K[j,k] = mean_i b_i[w+j]·b_i[w+k] over a block
// window starting at window_begin with window_len blocks. Requires at least
// 100 traces for a usable estimate.
Eigen::MatrixXd autocorrelation_matrix(const DecimatedEnsemble& ens, int window_begin,
                                       int window_len);

// Dominant eigenvector of a symmetric second-moment matrix, returned as a
// TemporalMode on the grid t_k = (k - n + 1)·dt (herald at the last block),
// sign-fixed so the largest-magnitude element is positive. Also returns the
// full eigenvalue spectrum in descending order.
std::pair<TemporalMode, Eigen::VectorXd> principal_mode(const Eigen::MatrixXd& K, double dt);

}  // namespace cvtomo
