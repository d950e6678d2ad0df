#include "cvtomo/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cvtomo {

std::vector<double> hermite_functions(int n_max, double x) {
    std::vector<double> psi(n_max);
    if (n_max <= 0) return psi;
    psi[0] = std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x);
    if (n_max == 1) return psi;
    psi[1] = std::sqrt(2.0) * x * psi[0];
    for (int n = 1; n + 1 < n_max; ++n) {
        psi[n + 1] = std::sqrt(2.0 / (n + 1.0)) * x * psi[n] -
                     std::sqrt(n / (n + 1.0)) * psi[n - 1];
    }
    return psi;
}

double quadrature_pdf_at(const DensityMatrix& rho, double theta, double x) {
    const int dim = int(rho.rows());
    std::vector<double> psi = hermite_functions(dim, x);
    // p(x|θ) = Σ_mn ρ_mn ψ_m ψ_n e^{i(n−m)θ}; accumulate the real part using
    // Hermitian symmetry (diagonal once, off-diagonals twice).
    double p = 0.0;
    for (int m = 0; m < dim; ++m) {
        p += rho(m, m).real() * psi[m] * psi[m];
        for (int n = m + 1; n < dim; ++n) {
            double ph = (n - m) * theta;
            complexd phase(std::cos(ph), std::sin(ph));
            p += 2.0 * (rho(m, n) * phase).real() * psi[m] * psi[n];
        }
    }
    return p;
}

std::vector<double> predicted_quadrature_pdf(const DensityMatrix& rho, double theta,
                                             const std::vector<double>& x_grid) {
    if (x_grid.size() < 2) {
        throw std::invalid_argument("predicted_quadrature_pdf: grid needs >= 2 points");
    }
    const double sigma_vac = std::sqrt(0.5);
    if (x_grid.front() > -5.0 * sigma_vac || x_grid.back() < 5.0 * sigma_vac) {
        throw std::invalid_argument(
            "predicted_quadrature_pdf: grid must span at least +/-5 vacuum sigma");
    }
    std::vector<double> pdf(x_grid.size());
    for (size_t i = 0; i < x_grid.size(); ++i) {
        double p = quadrature_pdf_at(rho, theta, x_grid[i]);
        if (p < -1e-9) {
            throw std::runtime_error(
                "predicted_quadrature_pdf: negative density, input state is broken");
        }
        pdf[i] = std::max(p, 0.0);
    }
    return pdf;
}

QuadratureSampler::QuadratureSampler(const DensityMatrix& rho, double theta,
                                     double x_max, int n_points) {
    if (n_points < 100) throw std::invalid_argument("QuadratureSampler: grid too coarse");
    x_grid_.resize(n_points);
    cdf_.resize(n_points);
    const double dx = 2.0 * x_max / (n_points - 1);
    std::vector<double> pdf(n_points);
    for (int i = 0; i < n_points; ++i) {
        x_grid_[i] = -x_max + i * dx;
        pdf[i] = std::max(quadrature_pdf_at(rho, theta, x_grid_[i]), 0.0);
    }
    cdf_[0] = 0.0;
    for (int i = 1; i < n_points; ++i) {
        cdf_[i] = cdf_[i - 1] + 0.5 * (pdf[i] + pdf[i - 1]) * dx;
    }
    double total = cdf_.back();
    if (total < 1e-6) throw std::runtime_error("QuadratureSampler: density integrates to ~0");
    for (double& c : cdf_) c /= total;
}

double QuadratureSampler::sample(double u) const {
    u = std::clamp(u, 0.0, 1.0 - 1e-16);
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    size_t hi = std::min<size_t>(it - cdf_.begin(), cdf_.size() - 1);
    size_t lo = hi - 1;
    double span = cdf_[hi] - cdf_[lo];
    double t = (span > 0.0) ? (u - cdf_[lo]) / span : 0.5;
    return x_grid_[lo] + t * (x_grid_[hi] - x_grid_[lo]);
}

}  // namespace cvtomo
