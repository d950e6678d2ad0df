#include "cvtomo/tomography.hpp"

#include "cvtomo/quadrature.hpp"
#include "cvtomo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cvtomo {

namespace {

// 5-point Gauss–Legendre nodes/weights on [-1, 1]; exact for the polynomial
// degrees the ψ_m ψ_n integrands reach inside a 0.1-wide bin.
constexpr double kGlNodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                0.5384693101056831, 0.9061798459386640};
constexpr double kGlWeights[5] = {0.2369268850561891, 0.4786286704993665,
                                  0.5688888888888889, 0.4786286704993665,
                                  0.2369268850561891};

}  // namespace

double QuadraturePOVM::completeness_defect() const {
    if (operators.empty()) return 1.0;
    const int dim = int(operators.front().rows());
    DensityMatrix sum = DensityMatrix::Zero(dim, dim);
    for (const auto& op : operators) sum += op;
    sum -= DensityMatrix::Identity(dim, dim);
    int core = std::max(dim - 2, 1);
    return sum.topLeftCorner(core, core).cwiseAbs().maxCoeff();
}

QuadraturePOVM build_povm(double theta, const std::vector<double>& x_grid, double eta,
                          int dim) {
    if (eta <= 0.0 || eta > 1.0) {
        throw std::invalid_argument("build_povm: eta must lie in (0, 1]");
    }
    if (x_grid.size() < 2) throw std::invalid_argument("build_povm: need >= 2 bins");
    double width = x_grid[1] - x_grid[0];
    for (size_t i = 1; i < x_grid.size(); ++i) {
        if (std::abs((x_grid[i] - x_grid[i - 1]) - width) > 1e-9 * std::abs(width)) {
            throw std::invalid_argument("build_povm: x grid must be uniformly spaced");
        }
    }
    if (width <= 0.0) throw std::invalid_argument("build_povm: bins must ascend");

    QuadraturePOVM povm;
    povm.theta = theta;
    povm.x_bin_centers = x_grid;
    povm.bin_width = width;
    povm.efficiency = eta;
    povm.operators.reserve(x_grid.size());

    // Projector elements ⟨m|x_θ⟩⟨x_θ|n⟩ = ψ_m ψ_n e^{i(m−n)θ}, so that
    // Tr[ρ Π] reproduces p(x|θ) = Σ ρ_mn ψ_m ψ_n e^{i(n−m)θ}.
    for (double xc : x_grid) {
        Eigen::MatrixXd overlap = Eigen::MatrixXd::Zero(dim, dim);
        for (int g = 0; g < 5; ++g) {
            double x = xc + 0.5 * width * kGlNodes[g];
            double wgt = 0.5 * width * kGlWeights[g];
            std::vector<double> psi = hermite_functions(dim, x);
            for (int m = 0; m < dim; ++m) {
                for (int n = m; n < dim; ++n) {
                    overlap(m, n) += wgt * psi[m] * psi[n];
                }
            }
        }
        DensityMatrix op(dim, dim);
        for (int m = 0; m < dim; ++m) {
            for (int n = m; n < dim; ++n) {
                double ph = (m - n) * theta;
                complexd val = overlap(m, n) * complexd(std::cos(ph), std::sin(ph));
                op(m, n) = val;
                op(n, m) = std::conj(val);
            }
        }
        povm.operators.push_back(std::move(op));
    }

    if (eta < 1.0) {
        // Loss-channel adjoint: Π ← Σ_k A_k† Π A_k. Guarantees
        // Tr[ρ Λ†(Π)] = Tr[Λ(ρ) Π] bin by bin.
        auto kraus = loss_kraus(eta, dim);
        for (auto& op : povm.operators) {
            DensityMatrix dual = DensityMatrix::Zero(dim, dim);
            for (const auto& A : kraus) {
                dual += A.transpose() * op * A;
            }
            op = std::move(dual);
        }
    }

    // Completeness guard. Away from the top two Fock levels the binned
    // projectors must nearly resolve the identity; the residual there is the
    // probability mass of ψ_n beyond the grid edge, which only becomes large
    // when the grid stops short of the core levels' classical turning points
    // (e.g. ±6 covers n = 17, turning point sqrt(35) ≈ 5.92, at the percent
    // level). A defect beyond 5% means the grid is genuinely too narrow for
    // the requested dimension rather than merely touching the truncation edge.
    double defect = povm.completeness_defect();
    if (defect > 0.05) {
        throw std::invalid_argument(
            "build_povm: quadrature grid too narrow, completeness defect " +
            std::to_string(defect));
    }
    return povm;
}

BinnedRecords bin_records(const std::vector<QuadratureRecord>& records, int n_phase_bins,
                          double x_max, double x_bin_width) {
    if (n_phase_bins < 1) throw std::invalid_argument("bin_records: need >= 1 phase bin");
    if (x_max <= 0.0 || x_bin_width <= 0.0 || x_bin_width > x_max) {
        throw std::invalid_argument("bin_records: bad x binning");
    }
    BinnedRecords out;
    out.n_phase_bins = n_phase_bins;
    int n_x = int(std::round(2.0 * x_max / x_bin_width));
    out.x_bin_width = x_bin_width;
    out.x_bin_centers.resize(n_x);
    for (int j = 0; j < n_x; ++j) {
        out.x_bin_centers[j] = -x_max + (j + 0.5) * x_bin_width;
    }
    out.phase_centers.resize(n_phase_bins);
    const double phase_width = M_PI / n_phase_bins;
    for (int i = 0; i < n_phase_bins; ++i) {
        out.phase_centers[i] = (i + 0.5) * phase_width;
    }
    out.counts = Eigen::MatrixXd::Zero(n_phase_bins, n_x);
    for (const auto& rec : records) {
        double theta = std::fmod(rec.theta, M_PI);
        if (theta < 0.0) theta += M_PI;
        int pi_bin = std::min(int(theta / phase_width), n_phase_bins - 1);
        int x_bin = int(std::floor((rec.x + x_max) / x_bin_width));
        if (x_bin < 0 || x_bin >= n_x) {
            ++out.overflow;
            continue;
        }
        out.counts(pi_bin, x_bin) += 1.0;
        ++out.total;
    }
    return out;
}

TomographyResult maxlik_reconstruct_binned(const BinnedRecords& binned, int dim,
                                           int iterations, double eta) {
    if (dim < 2) throw std::invalid_argument("maxlik_reconstruct: dim must be >= 2");
    if (iterations < 1) throw std::invalid_argument("maxlik_reconstruct: iterations >= 1");
    if (binned.total <= 0) throw std::invalid_argument("maxlik_reconstruct: no records");

    // POVM per occupied phase bin.
    std::vector<QuadraturePOVM> povms(binned.n_phase_bins);
    std::vector<bool> have_povm(binned.n_phase_bins, false);

    // Flattened list of occupied bins: (operator, frequency).
    struct Bin {
        const DensityMatrix* op;
        double freq;
    };
    std::vector<Bin> bins;
    for (int i = 0; i < binned.n_phase_bins; ++i) {
        double row_total = binned.counts.row(i).sum();
        if (row_total <= 0.0) continue;
        if (!have_povm[i]) {
            povms[i] = build_povm(binned.phase_centers[i], binned.x_bin_centers, eta, dim);
            have_povm[i] = true;
        }
        for (int j = 0; j < binned.counts.cols(); ++j) {
            double c = binned.counts(i, j);
            if (c > 0.0) {
                bins.push_back({&povms[i].operators[j], c / double(binned.total)});
            }
        }
    }
    if (bins.empty()) throw std::invalid_argument("maxlik_reconstruct: all bins empty");

    TomographyResult result;
    result.povm_efficiency = eta;
    DensityMatrix rho = DensityMatrix::Identity(dim, dim) / double(dim);

    double prev_loglik = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < iterations; ++iter) {
        DensityMatrix R = DensityMatrix::Zero(dim, dim);
        double loglik = 0.0;
        for (const auto& bin : bins) {
            // Tr[Π ρ] = Σ_ij Π_ij ρ_ji without forming the product.
            double p = bin.op->transpose().cwiseProduct(rho).sum().real();
            if (p < 1e-300) {
                p = 1e-300;
                ++result.floored_bins;
            }
            R += (bin.freq / p) * (*bin.op);
            loglik += bin.freq * std::log(p);
        }
        rho = R * rho * R;
        rho = 0.5 * (rho + rho.adjoint()).eval();  // clean roundoff asymmetry
        rho /= rho.trace().real();

        result.loglik_history.push_back(loglik);
        result.iterations = iter + 1;
        // Early exit once the step gain is numerically negligible.
        if (iter > 0) {
            double gain = loglik - prev_loglik;
            if (gain < 1e-10 * std::abs(loglik)) break;
        }
        prev_loglik = loglik;
    }
    result.rho = std::move(rho);
    return result;
}

TomographyResult maxlik_reconstruct(const std::vector<QuadratureRecord>& records, int dim,
                                    int iterations, double eta, int n_phase_bins,
                                    double x_max, double x_bin_width) {
    if (records.empty()) throw std::invalid_argument("maxlik_reconstruct: no records");
    BinnedRecords binned = bin_records(records, n_phase_bins, x_max, x_bin_width);
    int occupied = 0;
    for (int i = 0; i < binned.n_phase_bins; ++i) {
        if (binned.counts.row(i).sum() > 0.0) ++occupied;
    }
    if (occupied * 2 < n_phase_bins) {
        throw std::invalid_argument(
            "maxlik_reconstruct: phases cover less than half the [0, pi) range");
    }
    return maxlik_reconstruct_binned(binned, dim, iterations, eta);
}

std::vector<QuadratureRecord> sample_records(const DensityMatrix& rho, int n,
                                             std::uint64_t seed, int n_phases) {
    if (n < 0 || n_phases < 1) {
        throw std::invalid_argument("sample_records: bad sample/phase counts");
    }
    // One inverse-CDF table per phase; phases cycle deterministically so every
    // phase gets n/n_phases samples up to rounding.
    std::vector<QuadratureSampler> samplers;
    samplers.reserve(n_phases);
    for (int i = 0; i < n_phases; ++i) {
        double theta = (i + 0.5) * M_PI / n_phases;
        samplers.emplace_back(rho, theta);
    }
    Rng rng(stream_seed(seed, 0x73616d706c65ULL));  // dedicated sampling stream
    std::vector<QuadratureRecord> records(n);
    for (int i = 0; i < n; ++i) {
        int phase_idx = i % n_phases;
        records[i].theta = (phase_idx + 0.5) * M_PI / n_phases;
        records[i].x = samplers[phase_idx].sample(rng.uniform());
        records[i].trace_index = i;
    }
    return records;
}

}  // namespace cvtomo
