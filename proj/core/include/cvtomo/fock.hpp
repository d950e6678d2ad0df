#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

// Finite-cutoff Fock-basis representation of single-mode states and channels.
//
// Conventions used throughout the library:
//   x = (a + a†)/√2, p = (a − a†)/(i√2)  →  vacuum variance Var(x) = 1/2.
//   Variances in dB are relative to vacuum: V_dB = 10·log10(V / 0.5).
//   Wigner normalization ∫∫ W dx dp = 1 (vacuum peak 1/π).

namespace cvtomo {

using DensityMatrix = Eigen::MatrixXcd;
using complexd = std::complex<double>;

// Tolerances used by state validation.
constexpr double kHermitianTol = 1e-12;
constexpr double kTraceTol = 1e-9;
constexpr double kPsdTol = 1e-9;

// Throws std::invalid_argument if rho is not Hermitian (1e-12), unit trace
// (1e-9) and positive semidefinite (min eigenvalue >= -1e-9).
void check_state(const DensityMatrix& rho);

// |n><n| at the given cutoff.
DensityMatrix fock_state(int n, int dim);

// Squeezed vacuum with the squeezed axis along x.
// squeezing_db <= 0; Var(x) = 0.5·10^(squeezing_db/10).
// Only even Fock levels are populated. Throws std::invalid_argument when
// squeezing_db > 0, dim < 4, or the truncated-tail population at the cutoff
// exceeds 1e-5 (the state does not fit in the requested dimension).
DensityMatrix squeezed_vacuum(double squeezing_db, int dim);

// Population of the squeezed-vacuum expansion that falls above the cutoff.
double squeezed_vacuum_truncation_tail(double squeezing_db, int dim);

// Kraus operators A_k of the pure-loss channel with transmission eta;
// A_k maps |n> -> sqrt(C(n,k) eta^(n-k) (1-eta)^k) |n-k>.
std::vector<Eigen::MatrixXd> loss_kraus(double eta, int dim);

// Pure-loss channel: rho -> sum_k A_k rho A_k†. Trace-preserving at the
// cutoff. Throws std::invalid_argument for eta outside [0, 1].
DensityMatrix apply_loss(const DensityMatrix& rho, double eta);

struct SubtractionResult {
    DensityMatrix state;       // normalized conditional state, transmitted port
    double click_probability;  // P(click) on the tapped port
};

// Conditional photon subtraction at a beam-splitter tap of the given
// reflectivity, heralded by a click (POVM 1 − |0><0|) on the tapped port.
// The returned state is the normalized conditional state of the transmitted
// port. Throws std::invalid_argument for reflectivity outside (0, 1) and
// std::runtime_error when the click probability is below 1e-15 (nothing to
// herald, e.g. vacuum input).
SubtractionResult photon_subtract(const DensityMatrix& rho, double reflectivity);

// Ideal annihilation-operator subtraction: a rho a† / Tr[a rho a†].
// The small-reflectivity limit of photon_subtract. Same error conditions.
DensityMatrix annihilate(const DensityMatrix& rho);

// Convex mixture (1-weight_b)·rho_a + weight_b·rho_b.
// Throws std::invalid_argument on dimension mismatch or weight outside [0,1].
DensityMatrix mix(const DensityMatrix& rho_a, const DensityMatrix& rho_b,
                  double weight_b);

// Var(x_theta) with x_theta = x cosθ + p sinθ.
double quadrature_variance(const DensityMatrix& rho, double theta);

// <x_theta>.
double quadrature_mean(const DensityMatrix& rho, double theta);

// Uhlmann fidelity F(rho, sigma) = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
// Symmetric; 1 iff the states are equal. Throws on dimension mismatch.
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

// Tr[rho n̂].
double mean_photon_number(const DensityMatrix& rho);

// Tr[rho^2].
double purity(const DensityMatrix& rho);

// Wigner function at the phase-space origin via the parity sum
// (1/π)·Σ_n (−1)^n ρ_nn, in the ∫∫W dx dp = 1 convention.
double wigner_origin(const DensityMatrix& rho);

// Phase-space rotation rho -> e^{-iθn̂} rho e^{iθn̂}.
DensityMatrix rotate_state(const DensityMatrix& rho, double theta);

// dB <-> linear variance helpers (relative to vacuum variance 1/2).
double variance_to_db(double variance);
double db_to_variance(double db);

}  // namespace cvtomo
