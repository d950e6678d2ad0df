#pragma once

#include "cvtomo/fock.hpp"

#include <vector>

// Wigner function evaluation on phase-space grids, in the convention
// ∫∫ W dx dp = 1 with x = (a + a†)/√2 (vacuum peak 1/π, single-photon
// minimum −1/π).

namespace cvtomo {

struct WignerGrid {
    std::vector<double> x_values;
    std::vector<double> p_values;
    // w(i, j) = W(x_values[j], p_values[i]) — rows scan p, columns scan x.
    Eigen::MatrixXd w;

    // Trapezoidal ∫∫ W dx dp.
    double integral() const;
};

// W(x, p) at a single phase-space point, via the generalized-Laguerre kernel
//   W_{|m><n|}(α) = (1/π)(−1)^m sqrt(m!/n!) (2α)^{n−m} e^{−2|α|²} L_m^{n−m}(4|α|²)
// for n >= m, with α = (x + ip)/√2 and Hermitian completion for n < m.
double wigner_point(const DensityMatrix& rho, double x, double p);

// Evaluate W on the tensor grid x_values × p_values.
// Throws std::invalid_argument for an empty grid.
WignerGrid wigner_grid(const DensityMatrix& rho, const std::vector<double>& x_values,
                       const std::vector<double>& p_values);

// Uniform symmetric grid with n points over [−half_width, +half_width].
std::vector<double> uniform_grid(double half_width, int n);

}  // namespace cvtomo
