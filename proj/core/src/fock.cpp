#include "cvtomo/fock.hpp"

#include <cmath>
#include <stdexcept>

namespace cvtomo {

namespace {

// Annihilation operator at the cutoff: a|n> = sqrt(n)|n-1>.
Eigen::MatrixXd annihilation_op(int dim) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(double(n));
    return a;
}

// x_theta = (a e^{-iθ} + a† e^{iθ})/√2.
Eigen::MatrixXcd quadrature_op_theta(int dim, double theta) {
    Eigen::MatrixXd a = annihilation_op(dim);
    complexd e_minus(std::cos(theta), -std::sin(theta));
    Eigen::MatrixXcd x =
        (a.cast<complexd>() * e_minus + a.transpose().cast<complexd>() * std::conj(e_minus)) /
        std::sqrt(2.0);
    return x;
}

}  // namespace

void check_state(const DensityMatrix& rho) {
    if (rho.rows() != rho.cols() || rho.rows() < 1) {
        throw std::invalid_argument("density matrix must be square and non-empty");
    }
    double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm > kHermitianTol) {
        throw std::invalid_argument("density matrix is not Hermitian (max deviation " +
                                    std::to_string(herm) + ")");
    }
    double tr_err = std::abs(rho.trace().real() - 1.0) + std::abs(rho.trace().imag());
    if (tr_err > kTraceTol) {
        throw std::invalid_argument("density matrix trace deviates from 1 by " +
                                    std::to_string(tr_err));
    }
    Eigen::SelfAdjointEigenSolver<DensityMatrix> es(rho, Eigen::EigenvaluesOnly);
    double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < -kPsdTol) {
        throw std::invalid_argument("density matrix has negative eigenvalue " +
                                    std::to_string(min_eig));
    }
}

DensityMatrix fock_state(int n, int dim) {
    if (n < 0 || n >= dim) throw std::invalid_argument("fock_state: n outside [0, dim)");
    DensityMatrix rho = DensityMatrix::Zero(dim, dim);
    rho(n, n) = 1.0;
    return rho;
}

namespace {

// Unnormalized even-level amplitudes c_{2k} of squeezed vacuum with
// squeezing parameter r (squeezed along x):
//   c_{2k} = sqrt((2k)!)/(2^k k!) · (−tanh r)^k  (overall sech r^{1/2} factor
// restored by normalization). Evaluated in log space to stay finite.
std::vector<double> squeezed_amplitudes(double r, int dim) {
    std::vector<double> c(dim, 0.0);
    double lam = std::tanh(r);
    for (int k = 0; 2 * k < dim; ++k) {
        double log_mag = 0.5 * std::lgamma(2.0 * k + 1.0) - k * std::log(2.0) -
                         std::lgamma(k + 1.0) + k * std::log(std::max(lam, 1e-300));
        double sign = (k % 2 == 0) ? 1.0 : -1.0;  // (−tanh r)^k
        c[2 * k] = (lam == 0.0 && k > 0) ? 0.0 : sign * std::exp(log_mag);
    }
    return c;
}

}  // namespace

double squeezed_vacuum_truncation_tail(double squeezing_db, int dim) {
    double r = -squeezing_db * std::log(10.0) / 20.0;
    // Tail of the normalized distribution: compute far enough past the cutoff
    // that the remainder is negligible, then sum the part above dim.
    int big = std::max(4 * dim, 200);
    std::vector<double> c = squeezed_amplitudes(r, big);
    double total = 0.0, head = 0.0;
    for (int n = 0; n < big; ++n) {
        double p = c[n] * c[n];
        total += p;
        if (n < dim) head += p;
    }
    return (total - head) / total;
}

DensityMatrix squeezed_vacuum(double squeezing_db, int dim) {
    if (squeezing_db > 0.0) {
        throw std::invalid_argument("squeezed_vacuum: squeezing_db must be <= 0 dB");
    }
    if (dim < 4) throw std::invalid_argument("squeezed_vacuum: dim must be >= 4");
    double tail = squeezed_vacuum_truncation_tail(squeezing_db, dim);
    if (tail > 1e-5) {
        throw std::invalid_argument(
            "squeezed_vacuum: truncated population " + std::to_string(tail) +
            " exceeds 1e-5; increase dim");
    }
    double r = -squeezing_db * std::log(10.0) / 20.0;
    std::vector<double> c = squeezed_amplitudes(r, dim);
    Eigen::VectorXd psi(dim);
    for (int n = 0; n < dim; ++n) psi(n) = c[n];
    psi.normalize();
    return (psi * psi.transpose()).cast<complexd>();
}

std::vector<Eigen::MatrixXd> loss_kraus(double eta, int dim) {
    if (eta < 0.0 || eta > 1.0) {
        throw std::invalid_argument("loss_kraus: eta must lie in [0, 1]");
    }
    std::vector<Eigen::MatrixXd> kraus;
    kraus.reserve(dim);
    for (int k = 0; k < dim; ++k) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
        for (int n = k; n < dim; ++n) {
            // log of sqrt(C(n,k) eta^(n-k) (1-eta)^k)
            double log_binom =
                std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
            double amp;
            if (eta == 1.0) {
                amp = (k == 0) ? 1.0 : 0.0;
            } else if (eta == 0.0) {
                amp = (k == n) ? 1.0 : 0.0;
            } else {
                amp = std::exp(0.5 * (log_binom + (n - k) * std::log(eta) +
                                      k * std::log(1.0 - eta)));
            }
            A(n - k, n) = amp;
        }
        kraus.push_back(std::move(A));
    }
    return kraus;
}

DensityMatrix apply_loss(const DensityMatrix& rho, double eta) {
    if (eta < 0.0 || eta > 1.0) {
        throw std::invalid_argument("apply_loss: eta must lie in [0, 1]");
    }
    if (eta == 1.0) return rho;
    const int dim = int(rho.rows());
    DensityMatrix out = DensityMatrix::Zero(dim, dim);
    auto kraus = loss_kraus(eta, dim);
    for (const auto& A : kraus) {
        out += A * rho * A.transpose();
    }
    return out;
}

SubtractionResult photon_subtract(const DensityMatrix& rho, double reflectivity) {
    if (reflectivity <= 0.0 || reflectivity >= 1.0) {
        throw std::invalid_argument("photon_subtract: reflectivity must lie in (0, 1)");
    }
    const int dim = int(rho.rows());
    // Tapping R of the energy is the loss channel at eta = 1 − R. The click
    // outcome (POVM 1 − |0><0| on the tapped port) keeps every Kraus branch
    // that removed at least one photon; the no-click branch is A_0 alone.
    auto kraus = loss_kraus(1.0 - reflectivity, dim);
    DensityMatrix no_click = kraus[0] * rho * kraus[0].transpose();
    DensityMatrix all = apply_loss(rho, 1.0 - reflectivity);
    DensityMatrix clicked = all - no_click;
    double p_click = clicked.trace().real();
    if (p_click < 1e-15) {
        throw std::runtime_error(
            "photon_subtract: click probability below 1e-15, nothing to herald");
    }
    SubtractionResult result;
    result.state = clicked / p_click;
    result.click_probability = p_click;
    return result;
}

DensityMatrix annihilate(const DensityMatrix& rho) {
    const int dim = int(rho.rows());
    Eigen::MatrixXd a = annihilation_op(dim);
    DensityMatrix out = a.cast<complexd>() * rho * a.transpose().cast<complexd>();
    double tr = out.trace().real();
    if (tr < 1e-15) {
        throw std::runtime_error("annihilate: input has no photons to remove");
    }
    return out / tr;
}

DensityMatrix mix(const DensityMatrix& rho_a, const DensityMatrix& rho_b,
                  double weight_b) {
    if (rho_a.rows() != rho_b.rows() || rho_a.cols() != rho_b.cols()) {
        throw std::invalid_argument("mix: dimension mismatch");
    }
    if (weight_b < 0.0 || weight_b > 1.0) {
        throw std::invalid_argument("mix: weight must lie in [0, 1]");
    }
    return (1.0 - weight_b) * rho_a + weight_b * rho_b;
}

double quadrature_mean(const DensityMatrix& rho, double theta) {
    Eigen::MatrixXcd x = quadrature_op_theta(int(rho.rows()), theta);
    return (rho * x).trace().real();
}

double quadrature_variance(const DensityMatrix& rho, double theta) {
    Eigen::MatrixXcd x = quadrature_op_theta(int(rho.rows()), theta);
    double m1 = (rho * x).trace().real();
    double m2 = (rho * x * x).trace().real();
    return m2 - m1 * m1;
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.rows() != sigma.rows()) throw std::invalid_argument("fidelity: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<DensityMatrix> es(rho);
    Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0);
    DensityMatrix sqrt_rho =
        es.eigenvectors() * vals.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
    DensityMatrix inner = sqrt_rho * sigma * sqrt_rho;
    // Hermitize against roundoff before taking eigenvalues.
    inner = 0.5 * (inner + inner.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<DensityMatrix> es2(inner, Eigen::EigenvaluesOnly);
    double sum = es2.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return sum * sum;
}

double mean_photon_number(const DensityMatrix& rho) {
    double n = 0.0;
    for (int k = 0; k < rho.rows(); ++k) n += k * rho(k, k).real();
    return n;
}

double purity(const DensityMatrix& rho) { return (rho * rho).trace().real(); }

double wigner_origin(const DensityMatrix& rho) {
    double parity = 0.0;
    for (int n = 0; n < rho.rows(); ++n) {
        parity += ((n % 2 == 0) ? 1.0 : -1.0) * rho(n, n).real();
    }
    return parity / M_PI;
}

DensityMatrix rotate_state(const DensityMatrix& rho, double theta) {
    const int dim = int(rho.rows());
    DensityMatrix out(dim, dim);
    for (int m = 0; m < dim; ++m) {
        for (int n = 0; n < dim; ++n) {
            // e^{-iθn̂} ρ e^{iθn̂}: element (m,n) picks up e^{-iθ(m-n)}.
            double ph = -theta * (m - n);
            out(m, n) = rho(m, n) * complexd(std::cos(ph), std::sin(ph));
        }
    }
    return out;
}

double variance_to_db(double variance) {
    if (variance <= 0.0) throw std::invalid_argument("variance_to_db: variance must be > 0");
    return 10.0 * std::log10(variance / 0.5);
}

double db_to_variance(double db) { return 0.5 * std::pow(10.0, db / 10.0); }

}  // namespace cvtomo
