#include "cvtomo/analysis.hpp"

#include "cvtomo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cvtomo {

namespace {

double wrap_pi(double theta) {
    double t = std::fmod(theta, M_PI);
    if (t < 0.0) t += M_PI;
    return t;
}

// Mode projections of every length-len slot whose end lies in
// [end_first, end_last], stride one block; returns one value per slot.
void slot_projections(const Eigen::MatrixXd& blocks, int row, int end_first, int end_last,
                      const Eigen::VectorXd& f, double dt, std::vector<double>* out) {
    out->clear();
    const int len = static_cast<int>(f.size());
    for (int e = end_first; e <= end_last; ++e) {
        double acc = 0.0;
        const int beg = e - len + 1;
        for (int k = 0; k < len; ++k) acc += f[k] * blocks(row, beg + k);
        out->push_back(acc * dt);
    }
}

struct Welford {
    long long n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    double variance() const { return n > 0 ? m2 / n : 0.0; }
};

// Weighted least squares of v ≈ c0 + c1·cos2θ + c2·sin2θ over phase bins.
struct SinusoidFit {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    bool ok = false;
};

SinusoidFit fit_variance_sinusoid(const Eigen::VectorXd& bin_var,
                                  const Eigen::VectorXd& bin_weight, int n_bins) {
    Eigen::Matrix3d N = Eigen::Matrix3d::Zero();
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    int used = 0;
    for (int i = 0; i < n_bins; ++i) {
        const double w = bin_weight[i];
        if (w <= 0.0) continue;
        const double th = (i + 0.5) * M_PI / n_bins;
        const Eigen::Vector3d row(1.0, std::cos(2.0 * th), std::sin(2.0 * th));
        N += w * row * row.transpose();
        b += w * bin_var[i] * row;
        ++used;
    }
    SinusoidFit fit;
    if (used < 3) return fit;
    Eigen::Vector3d c = N.ldlt().solve(b);
    fit.c0 = c[0];
    fit.c1 = c[1];
    fit.c2 = c[2];
    fit.ok = true;
    return fit;
}

}  // namespace

double extract_quadrature(const HomodyneTrace& trace, const TemporalMode& mode,
                          double shot_scale) {
    if (!(shot_scale > 0.0)) {
        throw std::invalid_argument("extract_quadrature: shot_scale must be positive");
    }
    const double sp = trace.sample_period_s;
    const int n = static_cast<int>(trace.samples.size());
    double acc = 0.0;
    for (int k = 0; k < mode.size(); ++k) {
        const double steps = mode.t_grid[k] / sp;
        const int idx = trace.herald_index + static_cast<int>(std::lround(steps));
        if (std::abs(steps - std::lround(steps)) > 1e-6) {
            throw std::invalid_argument(
                "extract_quadrature: mode grid is not aligned to the sample grid");
        }
        if (idx < 0 || idx >= n) {
            throw std::invalid_argument("extract_quadrature: mode window exceeds trace bounds");
        }
        acc += mode.values[k] * trace.samples[idx];
    }
    return acc * mode.dt() / shot_scale;
}

double extract_block_quadrature(const Eigen::MatrixXd& blocks, int row, int end_block,
                                const TemporalMode& mode, double shot_scale) {
    const int len = mode.size();
    const int beg = end_block - len + 1;
    if (row < 0 || row >= blocks.rows() || beg < 0 || end_block >= blocks.cols()) {
        throw std::invalid_argument(
            "extract_block_quadrature: mode window exceeds trace bounds");
    }
    if (!(shot_scale > 0.0)) {
        throw std::invalid_argument("extract_block_quadrature: shot_scale must be positive");
    }
    double acc = 0.0;
    for (int k = 0; k < len; ++k) acc += mode.values[k] * blocks(row, beg + k);
    return acc * mode.dt() / shot_scale;
}

double calibrate_shot_noise(const DecimatedEnsemble& calibration, const TemporalMode& mode) {
    const int n_traces = static_cast<int>(calibration.blocks.rows());
    if (n_traces < 100) {
        throw std::invalid_argument("calibrate_shot_noise: need at least 100 vacuum traces");
    }
    const int len = mode.size();
    const int n_blocks = static_cast<int>(calibration.blocks.cols());
    if (len > n_blocks) {
        throw std::invalid_argument("calibrate_shot_noise: mode longer than the traces");
    }
    // Pool projections from every slot position of every trace; overlapping
    // slots are correlated but unbiased, and pooling beats a single-slot
    // estimate by an order of magnitude in precision.
    Welford acc;
    std::vector<double> proj;
    for (int i = 0; i < n_traces; ++i) {
        slot_projections(calibration.blocks, i, len - 1, n_blocks - 1, mode.values,
                         calibration.dt, &proj);
        for (double x : proj) acc.add(x);
    }
    const double var = acc.variance();
    if (var < 1e-30) {
        throw std::runtime_error("calibrate_shot_noise: vacuum variance below numerical floor");
    }
    return std::sqrt(var / 0.5);
}

double calibrate_shot_noise(const std::vector<HomodyneTrace>& calibration,
                            const TemporalMode& mode, int decimation) {
    return calibrate_shot_noise(decimate_traces(calibration, decimation), mode);
}

std::vector<double> estimate_phases(const DecimatedEnsemble& ens, const TemporalMode& mode,
                                    int bg_begin_block, int bg_end_block,
                                    double rad_per_trace, int fit_halfwidth, int min_slots) {
    const int n = static_cast<int>(ens.blocks.rows());
    if (n < 25) {
        throw std::invalid_argument("estimate_phases: need at least 25 traces");
    }
    const int len = mode.size();
    if (bg_begin_block < 0 || bg_end_block > ens.blocks.cols() || fit_halfwidth < 1) {
        throw std::invalid_argument("estimate_phases: bad window");
    }
    const int n_slots = bg_end_block - bg_begin_block - len + 1;
    if (n_slots < min_slots) {
        throw std::invalid_argument("estimate_phases: fewer than the minimum background slots");
    }

    // Per-trace background variance over mode-projected slots (one pass).
    Eigen::VectorXd v(n);
    std::vector<double> proj;
    for (int i = 0; i < n; ++i) {
        slot_projections(ens.blocks, i, bg_begin_block + len - 1, bg_end_block - 1,
                         mode.values, ens.dt, &proj);
        Welford acc;
        for (double x : proj) acc.add(x);
        v[i] = acc.variance();
    }

    // Degenerate ramp: no phase motion across the fit window, so the only
    // consistent answer is a common phase; report the ensemble's own axis (0).
    const int W = fit_halfwidth;
    if (std::abs(rad_per_trace) * 2.0 * W < 0.05) {
        return std::vector<double>(n, 0.0);
    }

    // Local harmonic regression: around trace i the model is
    //   v_j ≈ c0 − M·cos(2(θ_i + inc·(j−i)))
    //       = c0 + a·cos(2·inc·(j−i)) + b·sin(2·inc·(j−i))
    // with a = −M·cos 2θ_i, b = +M·sin 2θ_i, and inc the known per-trace
    // phase increment. Interior windows share one normal matrix.
    const double inc = rad_per_trace;
    Eigen::Matrix3d N_int = Eigen::Matrix3d::Zero();
    for (int d = -W; d <= W; ++d) {
        const Eigen::Vector3d row(1.0, std::cos(2.0 * inc * d), std::sin(2.0 * inc * d));
        N_int += row * row.transpose();
    }
    const Eigen::Matrix3d N_int_inv = N_int.inverse();

    std::vector<double> theta(n);
    double resid_sq = 0.0;
    double amp_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - W);
        const int hi = std::min(n - 1, i + W);
        Eigen::Vector3d b = Eigen::Vector3d::Zero();
        Eigen::Vector3d c;
        if (lo == i - W && hi == i + W) {
            for (int j = lo; j <= hi; ++j) {
                const double ph = 2.0 * inc * (j - i);
                b += v[j] * Eigen::Vector3d(1.0, std::cos(ph), std::sin(ph));
            }
            c = N_int_inv * b;
        } else {
            Eigen::Matrix3d N = Eigen::Matrix3d::Zero();
            for (int j = lo; j <= hi; ++j) {
                const double ph = 2.0 * inc * (j - i);
                const Eigen::Vector3d row(1.0, std::cos(ph), std::sin(ph));
                N += row * row.transpose();
                b += v[j] * row;
            }
            c = N.ldlt().solve(b);
        }
        const double amp = std::hypot(c[1], c[2]);
        theta[i] = (amp < 1e-12 * std::max(1.0, std::abs(c[0])))
                       ? 0.0
                       : wrap_pi(0.5 * std::atan2(c[2], -c[1]));
        const double r = v[i] - (c[0] + c[1]);  // model value at j = i
        resid_sq += r * r;
        amp_sum += amp;
    }

    // Distinguishability test: the mean fitted modulation depth must clear
    // the amplitude noise floor implied by the fit residuals.
    const double sigma_v = std::sqrt(resid_sq / n);
    const double mean_amp = amp_sum / n;
    const double mean_v = v.mean();
    if (sigma_v < 1e-15 * std::max(1.0, mean_v)) {
        // Noise-free constant input: exactly at the squeezing axis.
        return std::vector<double>(n, 0.0);
    }
    const double sigma_amp = sigma_v * std::sqrt(2.0 / (2.0 * W + 1.0));
    if (mean_amp < 4.0 * sigma_amp) {
        throw std::runtime_error(
            "estimate_phases: squeezing indistinguishable from vacuum, phases unidentifiable");
    }
    return theta;
}

std::vector<double> estimate_phases(const TraceSet& set, const TemporalMode& mode,
                                    double window_begin_s, double window_end_s,
                                    int decimation) {
    DecimatedEnsemble ens = decimate_traces(set.traces, decimation);
    const double dt = ens.dt;
    const int begin = ens.herald_block + static_cast<int>(std::lround(window_begin_s / dt));
    const int end = ens.herald_block + static_cast<int>(std::lround(window_end_s / dt)) + 1;
    // The background window must not touch the heralded-mode window.
    const int mode_begin = ens.herald_block - mode.size() + 1;
    if (!(end <= mode_begin || begin > ens.herald_block)) {
        throw std::invalid_argument("estimate_phases: window overlaps the heralded mode");
    }
    const double rad_per_trace =
        set.params.phase_ramp_rad_per_s / set.params.herald_rate_hz;
    return estimate_phases(ens, mode, begin, end, rad_per_trace);
}

SqueezingSummary squeezing_report(const std::vector<QuadratureRecord>& records,
                                  int n_phase_bins, int bootstrap_samples,
                                  std::uint64_t seed) {
    if (n_phase_bins < 4) {
        throw std::invalid_argument("squeezing_report: need at least 4 phase bins");
    }
    const int n = static_cast<int>(records.size());
    if (n < 4 * n_phase_bins) {
        throw std::invalid_argument("squeezing_report: too few records");
    }

    // Quadratures have zero mean; per-bin variance is the mean square.
    const double bin_w = M_PI / n_phase_bins;
    std::vector<int> bin_of(n);
    Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(n_phase_bins);
    Eigen::VectorXi count = Eigen::VectorXi::Zero(n_phase_bins);
    for (int i = 0; i < n; ++i) {
        const int b = std::min(static_cast<int>(wrap_pi(records[i].theta) / bin_w),
                               n_phase_bins - 1);
        bin_of[i] = b;
        sum_sq[b] += records[i].x * records[i].x;
        count[b] += 1;
    }

    const int kMinBinCount = 20;
    Eigen::VectorXd bin_var = Eigen::VectorXd::Zero(n_phase_bins);
    Eigen::VectorXd weight = Eigen::VectorXd::Zero(n_phase_bins);
    int occupied = 0;
    for (int b = 0; b < n_phase_bins; ++b) {
        if (count[b] > kMinBinCount) {
            bin_var[b] = sum_sq[b] / count[b];
            weight[b] = count[b];
            ++occupied;
        }
    }
    if (2 * occupied < n_phase_bins) {
        throw std::invalid_argument(
            "squeezing_report: phases cover less than half of [0, pi)");
    }

    auto to_db = [](double v) { return 10.0 * std::log10(v / 0.5); };
    auto evaluate = [&](const Eigen::VectorXd& var, const Eigen::VectorXd& wgt, double* sq,
                        double* anti, double* th0) {
        SinusoidFit fit = fit_variance_sinusoid(var, wgt, n_phase_bins);
        if (!fit.ok) throw std::runtime_error("squeezing_report: sinusoid fit failed");
        const double M = std::hypot(fit.c1, fit.c2);
        const double vmin = fit.c0 - M;
        const double vmax = fit.c0 + M;
        if (vmin <= 0.0) {
            throw std::runtime_error("squeezing_report: fitted minimum variance non-positive");
        }
        *sq = to_db(vmin);
        *anti = to_db(vmax);
        if (th0) *th0 = wrap_pi(0.5 * (std::atan2(fit.c2, fit.c1) + M_PI));
    };

    SqueezingSummary out;
    out.bin_variance = bin_var;
    out.bin_count = count;
    evaluate(bin_var, weight, &out.sq_db, &out.antisq_db, &out.theta0_rad);

    // Bootstrap over records for one-sigma uncertainties.
    if (bootstrap_samples > 0) {
        Rng rng(stream_seed(seed, 0x72657361ULL));
        std::vector<double> sqs, antis;
        sqs.reserve(bootstrap_samples);
        antis.reserve(bootstrap_samples);
        Eigen::VectorXd bsum(n_phase_bins);
        Eigen::VectorXi bcnt(n_phase_bins);
        for (int rep = 0; rep < bootstrap_samples; ++rep) {
            bsum.setZero();
            bcnt.setZero();
            for (int k = 0; k < n; ++k) {
                const int i = std::min(static_cast<int>(rng.uniform() * n), n - 1);
                bsum[bin_of[i]] += records[i].x * records[i].x;
                bcnt[bin_of[i]] += 1;
            }
            Eigen::VectorXd var = Eigen::VectorXd::Zero(n_phase_bins);
            Eigen::VectorXd wgt = Eigen::VectorXd::Zero(n_phase_bins);
            for (int b = 0; b < n_phase_bins; ++b) {
                if (bcnt[b] > kMinBinCount) {
                    var[b] = bsum[b] / bcnt[b];
                    wgt[b] = bcnt[b];
                }
            }
            double sq, anti;
            try {
                evaluate(var, wgt, &sq, &anti, nullptr);
            } catch (const std::runtime_error&) {
                continue;  // degenerate resample; skip
            }
            sqs.push_back(sq);
            antis.push_back(anti);
        }
        auto stddev = [](const std::vector<double>& xs) {
            if (xs.size() < 2) return 0.0;
            Welford acc;
            for (double x : xs) acc.add(x);
            return std::sqrt(acc.variance() * xs.size() / (xs.size() - 1.0));
        };
        out.sq_err_db = stddev(sqs);
        out.antisq_err_db = stddev(antis);
    }
    return out;
}

AnalysisResult analyze_traces(const TraceSet& set, const AnalysisParams& params) {
    if (set.calibration_traces.empty()) {
        throw std::invalid_argument("analyze_traces: calibration traces are required");
    }
    DecimatedEnsemble ens = decimate_traces(set.traces, params.decimation);
    DecimatedEnsemble cal = decimate_traces(set.calibration_traces, params.decimation);

    const int win_len = static_cast<int>(params.mode_window_s / ens.dt + 1e-9);
    if (win_len < 4) {
        throw std::invalid_argument("analyze_traces: mode window too short after decimation");
    }
    const int win_begin = ens.herald_block - win_len + 1;
    if (win_begin < 0) {
        throw std::invalid_argument("analyze_traces: mode window starts before the trace");
    }

    AnalysisResult res;
    res.window_blocks = win_len;

    // Temporal mode from the raw second-moment matrix over the heralded window.
    const Eigen::MatrixXd K = autocorrelation_matrix(ens, win_begin, win_len);
    auto [mode, spectrum] = principal_mode(K, ens.dt);
    res.measured_mode = mode;
    res.mode_spectrum = spectrum;
    res.mode_fit = fit_exponential_mode(mode);

    // Projection mode: the fitted analytic exponential on the same grid keeps
    // the overlap with the injected wavepacket marginally higher than the
    // noisy eigenvector itself.
    if (params.fitted_mode_extraction) {
        TemporalMode em = mode;
        const double t_end = mode.t_grid[mode.size() - 1];
        for (int k = 0; k < em.size(); ++k) {
            em.values[k] = std::exp(res.mode_fit.gamma_per_s * (mode.t_grid[k] - t_end));
        }
        em.values /= std::sqrt(em.values.squaredNorm() * em.dt());
        em.fwhm_hz = res.mode_fit.fwhm_hz;
        res.extraction_mode = em;
    } else {
        res.extraction_mode = mode;
    }

    res.shot_scale = calibrate_shot_noise(cal, res.extraction_mode);

    // Background geometry: a guard margin on both sides of the heralded
    // window; disjoint record slots on the left, phase-estimation slots on
    // the right. Keeping the two regions separate prevents the phase fit from
    // biasing the record statistics.
    const int n_blocks = static_cast<int>(ens.blocks.cols());
    const int left_end = win_begin - params.margin_blocks;      // exclusive
    const int right_begin = ens.herald_block + 1 + params.margin_blocks;
    const double rad_per_trace =
        set.params.phase_ramp_rad_per_s / set.params.herald_rate_hz;

    bool fallback = false;
    try {
        res.est_phase_rad =
            estimate_phases(ens, res.extraction_mode, right_begin, n_blocks, rad_per_trace,
                            params.phase_fit_halfwidth, params.min_background_slots);
    } catch (const std::runtime_error&) {
        // No measurable squeezing modulation (e.g. vacuum input): fall back to
        // the nominal acquisition ramp so phase-insensitive statistics still
        // get uniform phase coverage.
        const int n = static_cast<int>(ens.blocks.rows());
        res.est_phase_rad.resize(n);
        for (int i = 0; i < n; ++i) {
            const double th = rad_per_trace * ens.acquisition_index[i];
            res.est_phase_rad[i] = wrap_pi(th);
        }
        fallback = true;
    }
    res.phases_from_ramp_fallback = fallback;

    // RMS phase error against synthetic ground truth, mod pi.
    if (!ens.true_phase.empty() && !fallback) {
        double acc = 0.0;
        const int n = static_cast<int>(ens.true_phase.size());
        for (int i = 0; i < n; ++i) {
            double d = wrap_pi(res.est_phase_rad[i] - ens.true_phase[i]);
            if (d > M_PI / 2.0) d -= M_PI;
            acc += d * d;
        }
        res.phase_rms_rad = std::sqrt(acc / n);
    }

    // Quadrature records: heralded window plus disjoint background slots.
    const int n_traces = static_cast<int>(ens.blocks.rows());
    res.heralded_records.reserve(n_traces);
    int n_rec = 0;
    while (n_rec < params.n_background_records &&
           (n_rec + 1) * win_len <= left_end) {
        ++n_rec;
    }
    if (n_rec < 1) {
        throw std::invalid_argument("analyze_traces: no room for background record slots");
    }
    res.background_records.reserve(static_cast<size_t>(n_traces) * n_rec);
    for (int i = 0; i < n_traces; ++i) {
        QuadratureRecord rec;
        rec.x = extract_block_quadrature(ens.blocks, i, ens.herald_block,
                                         res.extraction_mode, res.shot_scale);
        rec.theta = res.est_phase_rad[i];
        rec.trace_index = ens.acquisition_index[i];
        res.heralded_records.push_back(rec);
        for (int r = 0; r < n_rec; ++r) {
            QuadratureRecord bg;
            bg.x = extract_block_quadrature(ens.blocks, i, r * win_len + win_len - 1,
                                            res.extraction_mode, res.shot_scale);
            bg.theta = res.est_phase_rad[i];
            bg.trace_index = ens.acquisition_index[i];
            res.background_records.push_back(bg);
        }
    }

    res.squeezing = squeezing_report(res.background_records, params.n_phase_bins,
                                     params.bootstrap_samples, params.bootstrap_seed);
    return res;
}

}  // namespace cvtomo
