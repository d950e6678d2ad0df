#pragma once

#include "cvtomo/fock.hpp"

#include <cstdint>
#include <vector>

// Maximum-likelihood homodyne tomography: quadrature-bin POVMs (optionally
// embedding detection efficiency), record binning, and the iterative RρR
// reconstruction.

namespace cvtomo {

// One homodyne sample: quadrature value and local-oscillator phase.
struct QuadratureRecord {
    double x = 0.0;       // shot-noise units (vacuum variance 1/2)
    double theta = 0.0;   // radians, reduced to [0, π)
    int trace_index = 0;
};

struct QuadraturePOVM {
    double theta = 0.0;
    std::vector<double> x_bin_centers;
    double bin_width = 0.0;
    double efficiency = 1.0;
    std::vector<DensityMatrix> operators;  // one per bin

    // Max |(ΣΠ − 1)_mn| over m,n < dim−2 (the top two Fock levels absorb
    // truncation leakage of the loss adjoint and are excluded).
    double completeness_defect() const;
};

// POVM for quadrature bins centered on x_grid (uniform spacing = bin width)
// at LO phase theta. For eta = 1 the bin operators are
//   Π_mn = ∫_bin ψ_m(x)ψ_n(x) dx · e^{i(n−m)θ}
// (5-point Gauss–Legendre per bin). For eta < 1 the ideal operators are
// passed through the loss-channel adjoint Λ_η†(Π) = Σ_k A_k† Π A_k, so that
// Tr[ρ Π_η] = Tr[Λ_η(ρ) Π] exactly — the measurement model absorbs the loss.
// Throws std::invalid_argument for eta outside (0, 1], a non-uniform or empty
// grid, or a grid so narrow the completeness defect exceeds 5% (a ±6 grid at
// dim 20 sits near 3.5% from truncation-edge leakage alone; see the defect
// accessor for what is excluded).
QuadraturePOVM build_povm(double theta, const std::vector<double>& x_grid, double eta,
                          int dim);

// Records histogrammed on a (phase-bin × x-bin) lattice for O(bins)
// likelihood iterations.
struct BinnedRecords {
    int n_phase_bins = 0;
    std::vector<double> phase_centers;     // bin centers over [0, π)
    std::vector<double> x_bin_centers;     // shared across phases
    double x_bin_width = 0.0;
    Eigen::MatrixXd counts;                // (phase bin, x bin)
    std::int64_t total = 0;
    std::int64_t overflow = 0;             // records outside the x range (dropped)
};

BinnedRecords bin_records(const std::vector<QuadratureRecord>& records, int n_phase_bins,
                          double x_max, double x_bin_width);

struct TomographyResult {
    DensityMatrix rho;
    std::vector<double> loglik_history;  // one entry per completed iteration
    int iterations = 0;                  // iterations actually run
    double povm_efficiency = 1.0;
    std::int64_t floored_bins = 0;       // bins regularized by the 1e-300 floor
};

// Iterative maximum-likelihood reconstruction: ρ ← N[R(ρ) ρ R(ρ)] with
// R(ρ) = Σ_j (f_j/p_j(ρ)) Π_j over occupied bins, from the maximally mixed
// start. Stops after `iterations` steps (default 200) or earlier once the
// per-step log-likelihood gain drops below 1e-10 in relative terms.
// Bin probabilities below 1e-300 are floored and counted.
TomographyResult maxlik_reconstruct_binned(const BinnedRecords& binned, int dim,
                                           int iterations, double eta);

// Convenience wrapper: bins the records (60 phase bins, x range ±6, width 0.1
// by default) and reconstructs. Warns via the returned struct only; throws
// std::invalid_argument when records are empty or phases span < π coverage
// (less than half the phase bins occupied).
TomographyResult maxlik_reconstruct(const std::vector<QuadratureRecord>& records, int dim,
                                    int iterations, double eta, int n_phase_bins = 60,
                                    double x_max = 6.0, double x_bin_width = 0.1);

// Draw n records from the homodyne statistics of rho with phases cycling
// through n_phases equally spaced values in [0, π). Deterministic given seed.
std::vector<QuadratureRecord> sample_records(const DensityMatrix& rho, int n,
                                             std::uint64_t seed, int n_phases = 60);

}  // namespace cvtomo
