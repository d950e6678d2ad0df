#include "cvtomo/wigner.hpp"

#include <cmath>
#include <stdexcept>

namespace cvtomo {

double WignerGrid::integral() const {
    if (x_values.size() < 2 || p_values.size() < 2) return 0.0;
    // Trapezoid weights: 1/2 on the boundary, 1 inside (uniform grids).
    double dx = x_values[1] - x_values[0];
    double dp = p_values[1] - p_values[0];
    double sum = 0.0;
    for (int i = 0; i < w.rows(); ++i) {
        double wrow = (i == 0 || i == w.rows() - 1) ? 0.5 : 1.0;
        for (int j = 0; j < w.cols(); ++j) {
            double wcol = (j == 0 || j == w.cols() - 1) ? 0.5 : 1.0;
            sum += wrow * wcol * w(i, j);
        }
    }
    return sum * dx * dp;
}

double wigner_point(const DensityMatrix& rho, double x, double p) {
    const int dim = int(rho.rows());
    const complexd alpha(x / std::sqrt(2.0), p / std::sqrt(2.0));
    const double r2 = 4.0 * std::norm(alpha);  // 4|α|²
    const double gauss = std::exp(-0.5 * r2);  // e^{−2|α|²}

    // Precompute (2α)^d for d = 0..dim−1.
    std::vector<complexd> alpha_pow(dim);
    alpha_pow[0] = 1.0;
    for (int d = 1; d < dim; ++d) alpha_pow[d] = alpha_pow[d - 1] * (2.0 * alpha);

    // Precompute sqrt(m!/n!) factors in log space: f(m,n) = exp((lgamma(m+1) −
    // lgamma(n+1))/2). Only lgamma values are needed.
    std::vector<double> lg(dim + 1);
    for (int k = 0; k <= dim; ++k) lg[k] = std::lgamma(k + 1.0);

    complexd acc = 0.0;
    for (int d = 0; d < dim; ++d) {  // d = n − m >= 0
        // Upward Laguerre recurrence in m for fixed order d:
        //   L_0^d = 1, L_1^d = 1 + d − r2,
        //   (m+1) L_{m+1}^d = (2m + 1 + d − r2) L_m^d − (m + d) L_{m−1}^d.
        double L_prev = 0.0, L_curr = 1.0;
        for (int m = 0; m + d < dim; ++m) {
            int n = m + d;
            double prefac = ((m % 2 == 0) ? 1.0 : -1.0) *
                            std::exp(0.5 * (lg[m] - lg[n])) * gauss / M_PI;
            complexd kernel = prefac * alpha_pow[d] * L_curr;
            if (d == 0) {
                acc += rho(m, n) * kernel;
            } else {
                // ρ_mn K_mn + ρ_nm K_nm = 2 Re(ρ_mn K_mn) by Hermiticity.
                acc += rho(m, n) * kernel + rho(n, m) * std::conj(kernel);
            }
            double L_next =
                ((2.0 * m + 1.0 + d - r2) * L_curr - (m + d) * L_prev) / (m + 1.0);
            L_prev = L_curr;
            L_curr = L_next;
        }
    }
    return acc.real();
}

WignerGrid wigner_grid(const DensityMatrix& rho, const std::vector<double>& x_values,
                       const std::vector<double>& p_values) {
    if (x_values.empty() || p_values.empty()) {
        throw std::invalid_argument("wigner_grid: empty grid");
    }
    WignerGrid grid;
    grid.x_values = x_values;
    grid.p_values = p_values;
    grid.w.resize(int(p_values.size()), int(x_values.size()));
    for (size_t i = 0; i < p_values.size(); ++i) {
        for (size_t j = 0; j < x_values.size(); ++j) {
            grid.w(int(i), int(j)) = wigner_point(rho, x_values[j], p_values[i]);
        }
    }
    return grid;
}

std::vector<double> uniform_grid(double half_width, int n) {
    if (n < 2 || half_width <= 0.0) {
        throw std::invalid_argument("uniform_grid: need n >= 2 and half_width > 0");
    }
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) {
        g[i] = -half_width + 2.0 * half_width * i / (n - 1);
    }
    return g;
}

}  // namespace cvtomo
