#pragma once

#include "cvtomo/fock.hpp"

#include <cstdint>
#include <vector>

// Homodyne quadrature marginals p(x|θ) of Fock-basis states, built from
// harmonic-oscillator wavefunctions ψ_n(x) in the Var_vac(x) = 1/2 convention.

namespace cvtomo {

// ψ_0..ψ_{n_max-1} evaluated at x, via the stable upward recurrence
//   ψ_0 = π^{-1/4} e^{-x²/2},  ψ_{n+1} = sqrt(2/(n+1)) x ψ_n − sqrt(n/(n+1)) ψ_{n-1}.
// Normalized: ∫ ψ_n² dx = 1. No overflow for any n (amplitudes stay bounded).
std::vector<double> hermite_functions(int n_max, double x);

// p(x|θ) = Σ_mn ρ_mn ψ_m(x) ψ_n(x) e^{i(n−m)θ}, evaluated on x_grid.
// Real and nonnegative for a valid state; integrates to 1 on a grid spanning
// at least ±5 vacuum standard deviations. Throws std::invalid_argument when
// the grid is narrower than that, and std::runtime_error if the computed
// density dips below −1e−9 (broken input state).
std::vector<double> predicted_quadrature_pdf(const DensityMatrix& rho, double theta,
                                             const std::vector<double>& x_grid);

// Single-point evaluation of the same marginal.
double quadrature_pdf_at(const DensityMatrix& rho, double theta, double x);

// Tabulated inverse-CDF sampler for p(x|θ). Build once per (state, θ), then
// map uniform deviates in [0,1) to quadrature values by linear interpolation
// of the inverse CDF on a fine grid.
class QuadratureSampler {
  public:
    // Grid spans ±x_max with n_points samples (default resolution ~1e-3·x_max).
    QuadratureSampler(const DensityMatrix& rho, double theta, double x_max = 9.0,
                      int n_points = 18001);

    double sample(double u) const;  // u in [0, 1)

  private:
    std::vector<double> x_grid_;
    std::vector<double> cdf_;  // monotone, cdf_.front() = 0, cdf_.back() = 1
};

}  // namespace cvtomo
