#include "cvtomo/temporal_mode.hpp"

#include <cmath>
#include <stdexcept>

namespace cvtomo {

namespace {

// Normalised overlap between mode values and the causal exponential
// e^{γ(t - t_end)} truncated at the grid end. With the amplitude profiled
// out, the least-squares fit of A·e^{γ(t-t0)} (t0 and A free) reduces to
// maximising this quantity over γ alone: shifting t0 only rescales A.
double exponential_overlap(const TemporalMode& mode, double gamma) {
    const int n = mode.size();
    const double dt = mode.dt();
    const double t_end = mode.t_grid[n - 1];
    double dot = 0.0;
    double ee = 0.0;
    for (int k = 0; k < n; ++k) {
        const double e = std::exp(gamma * (mode.t_grid[k] - t_end));
        dot += mode.values[k] * e;
        ee += e * e;
    }
    const double ff = mode.values.squaredNorm();
    if (ee <= 0.0 || ff <= 0.0) return 0.0;
    (void)dt;
    return std::abs(dot) / std::sqrt(ee * ff);
}

}  // namespace

TemporalMode temporal_mode(double gamma_per_s, const Eigen::VectorXd& t_grid, double t0_s) {
    if (!(gamma_per_s > 0.0)) {
        throw std::invalid_argument("temporal_mode: gamma must be positive");
    }
    if (t_grid.size() < 2) {
        throw std::invalid_argument("temporal_mode: grid needs at least two points");
    }
    const double dt = t_grid[1] - t_grid[0];
    if (!(dt > 0.0)) {
        throw std::invalid_argument("temporal_mode: grid must be strictly increasing");
    }
    // The discrete normalisation below treats dt as constant, so an uneven
    // grid would silently misweight the samples.
    for (int k = 1; k < t_grid.size(); ++k) {
        if (std::abs((t_grid[k] - t_grid[k - 1]) - dt) > 1e-9 * dt) {
            throw std::invalid_argument("temporal_mode: grid must be uniformly spaced");
        }
    }
    if (t_grid[0] > t0_s - 8.0 / gamma_per_s) {
        throw std::invalid_argument(
            "temporal_mode: grid must extend at least eight decay constants below the support edge");
    }

    TemporalMode mode;
    mode.t_grid = t_grid;
    mode.values.resize(t_grid.size());
    for (int k = 0; k < t_grid.size(); ++k) {
        const double t = t_grid[k];
        mode.values[k] = (t <= t0_s) ? std::sqrt(2.0 * gamma_per_s) * std::exp(gamma_per_s * (t - t0_s))
                                     : 0.0;
    }
    const double norm = mode.values.squaredNorm() * dt;
    mode.values /= std::sqrt(norm);
    mode.fwhm_hz = gamma_per_s / M_PI;
    return mode;
}

ModeFit fit_exponential_mode(const TemporalMode& mode) {
    const int n = mode.size();
    if (n < 4) {
        throw std::invalid_argument("fit_exponential_mode: mode too short to fit");
    }
    const double dt = mode.dt();
    if (!(dt > 0.0)) {
        throw std::invalid_argument("fit_exponential_mode: invalid time grid");
    }

    // Initial scale from the f^2-weighted centroid: for a causal exponential
    // ending at the grid edge, <t> = t_end - 1/(2γ).
    const double t_end = mode.t_grid[n - 1];
    double w = 0.0;
    double tw = 0.0;
    for (int k = 0; k < n; ++k) {
        const double f2 = mode.values[k] * mode.values[k];
        w += f2;
        tw += f2 * mode.t_grid[k];
    }
    const double lag = t_end - tw / w;
    double gamma0 = (lag > 0.0) ? 1.0 / (2.0 * lag) : 1.0 / (n * dt);

    // Golden-section search on log γ. The overlap is smooth and unimodal for
    // anything resembling an exponential; the wide bracket covers pathological
    // inputs, for which the residual ends up flagged instead.
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = std::log(gamma0 / 64.0);
    double hi = std::log(gamma0 * 64.0);
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = exponential_overlap(mode, std::exp(x1));
    double f2 = exponential_overlap(mode, std::exp(x2));
    for (int it = 0; it < 200 && (hi - lo) > 1e-12; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = exponential_overlap(mode, std::exp(x2));
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = exponential_overlap(mode, std::exp(x1));
        }
    }
    const double gamma = std::exp(0.5 * (lo + hi));
    const double overlap = exponential_overlap(mode, gamma);

    // Recover the support edge from the profiled amplitude: the best-fit
    // model is A·e^{γ(t - t_end)} with A = <f,e>/<e,e>, and matching it to
    // sqrt(2γ)·e^{γ(t - t0)} gives t0 = t_end - log(A/sqrt(2γ))/γ.
    double dot = 0.0;
    double ee = 0.0;
    for (int k = 0; k < n; ++k) {
        const double e = std::exp(gamma * (mode.t_grid[k] - t_end));
        dot += mode.values[k] * e;
        ee += e * e;
    }
    const double amplitude = std::abs(dot) / ee;

    ModeFit fit;
    fit.gamma_per_s = gamma;
    fit.t0_s = t_end - std::log(amplitude / std::sqrt(2.0 * gamma)) / gamma;
    fit.fwhm_hz = gamma / M_PI;
    fit.residual = std::max(0.0, 1.0 - overlap * overlap);
    fit.non_exponential = fit.residual > 0.1;
    return fit;
}

DecimatedEnsemble decimate_traces(const std::vector<HomodyneTrace>& traces, int decimation) {
    if (traces.empty()) {
        throw std::invalid_argument("decimate_traces: empty ensemble");
    }
    if (decimation < 1) {
        throw std::invalid_argument("decimate_traces: decimation must be >= 1");
    }
    const int n_samples = static_cast<int>(traces.front().samples.size());
    const int herald = traces.front().herald_index;
    for (const auto& tr : traces) {
        if (static_cast<int>(tr.samples.size()) != n_samples || tr.herald_index != herald) {
            throw std::invalid_argument("decimate_traces: traces must share length and herald index");
        }
    }
    if (herald < 0 || herald >= n_samples) {
        throw std::invalid_argument("decimate_traces: herald index out of range");
    }

    // Align blocks so one block ends exactly at the herald sample.
    const int start = (herald + 1) % decimation;
    const int n_blocks = (n_samples - start) / decimation;
    const int herald_block = (herald + 1 - start) / decimation - 1;
    if (n_blocks < 1 || herald_block < 0) {
        throw std::invalid_argument("decimate_traces: trace too short for this decimation");
    }

    DecimatedEnsemble ens;
    ens.decimation = decimation;
    ens.herald_block = herald_block;
    ens.dt = traces.front().sample_period_s * decimation;
    ens.blocks.resize(static_cast<int>(traces.size()), n_blocks);
    ens.acquisition_index.reserve(traces.size());
    const bool have_phase = traces.front().has_true_phase;
    if (have_phase) ens.true_phase.reserve(traces.size());

    const double inv = 1.0 / decimation;
    for (int i = 0; i < static_cast<int>(traces.size()); ++i) {
        const auto& s = traces[i].samples;
        for (int b = 0; b < n_blocks; ++b) {
            double acc = 0.0;
            const int off = start + b * decimation;
            for (int k = 0; k < decimation; ++k) acc += s[off + k];
            ens.blocks(i, b) = acc * inv;
        }
        ens.acquisition_index.push_back(traces[i].acquisition_index);
        if (have_phase) ens.true_phase.push_back(traces[i].true_phase_rad);
    }
    return ens;
}

Eigen::MatrixXd autocorrelation_matrix(const DecimatedEnsemble& ens, int window_begin,
                                       int window_len) {
    const int n_traces = static_cast<int>(ens.blocks.rows());
    if (n_traces < 100) {
        throw std::invalid_argument("autocorrelation_matrix: need at least 100 traces");
    }
    if (window_len < 2 || window_begin < 0 ||
        window_begin + window_len > ens.blocks.cols()) {
        throw std::invalid_argument("autocorrelation_matrix: window out of range");
    }
    const Eigen::MatrixXd win = ens.blocks.middleCols(window_begin, window_len);
    return (win.transpose() * win) / static_cast<double>(n_traces);
}

std::pair<TemporalMode, Eigen::VectorXd> principal_mode(const Eigen::MatrixXd& K, double dt) {
    if (K.rows() != K.cols() || K.rows() < 2) {
        throw std::invalid_argument("principal_mode: matrix must be square");
    }
    const double scale = std::max(1.0, K.cwiseAbs().maxCoeff());
    if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
        throw std::invalid_argument("principal_mode: matrix is not symmetric");
    }
    if (!(dt > 0.0)) {
        throw std::invalid_argument("principal_mode: dt must be positive");
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(K);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("principal_mode: eigendecomposition failed");
    }
    const int n = static_cast<int>(K.rows());
    // Eigen returns ascending order; report descending.
    Eigen::VectorXd spectrum = solver.eigenvalues().reverse();
    Eigen::VectorXd v = solver.eigenvectors().col(n - 1);

    // Fix the sign so the peak is positive, and normalise as sum(f^2)·dt = 1.
    int peak = 0;
    v.cwiseAbs().maxCoeff(&peak);
    if (v[peak] < 0.0) v = -v;
    v /= std::sqrt(v.squaredNorm() * dt);

    TemporalMode mode;
    mode.t_grid.resize(n);
    for (int k = 0; k < n; ++k) mode.t_grid[k] = (k - n + 1) * dt;
    mode.values = v;
    mode.fwhm_hz = 0.0;  // unknown until fitted
    return {mode, spectrum};
}

}  // namespace cvtomo
