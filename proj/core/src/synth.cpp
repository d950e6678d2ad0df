#include "cvtomo/synth.hpp"

#include "cvtomo/quadrature.hpp"
#include "cvtomo/rng.hpp"
#include "cvtomo/temporal_mode.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace cvtomo {

namespace {

constexpr int kPhaseTables = 96;  // inverse-CDF tables across [0, pi)

// Calibration traces get their own seed block, disjoint from per-trace seeds.
constexpr std::uint64_t kCalibrationStream = 0x8000000000000000ULL;

// Variance factor relating per-mode variance V to the f-projection variance
// after the single-pole low-pass: Var(Σ f_j y_j Δt) = V·g with
// g = (1−a)/(1+a) · Σ_jk f_j a^{|j−k|} f_k · Δt.
// The double sum collapses to O(L) with forward/backward geometric prefixes
// p_j = Σ_{k≤j} a^{j−k} f_k and q_j = Σ_{k≥j} a^{k−j} f_k.
double projection_gain(const std::vector<double>& f, double a, double dt) {
    const int n = static_cast<int>(f.size());
    std::vector<double> q(n);
    double acc = 0.0;
    for (int j = n - 1; j >= 0; --j) {
        acc = a * acc + f[j];
        q[j] = acc;
    }
    double p = 0.0;
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
        p = a * p + f[j];
        total += f[j] * (p + q[j] - f[j]);
    }
    return (1.0 - a) / (1.0 + a) * total * dt;
}

// One band-limited Gaussian trace: white noise of per-sample variance V/Δt
// through y_k = a·y_{k−1} + (1−a)·w_k, started in its stationary
// distribution. If a mode kernel is given, the f-component of the window
// ending at the herald is replaced so the projection Σ f y Δt equals target.
std::vector<float> generate_trace(Rng& rng, double variance, int n_samples, double a,
                                  double dt, int herald, const std::vector<double>* mode,
                                  double target) {
    const double sw = std::sqrt(variance / dt);
    const double gain = 1.0 - a;
    std::vector<double> buf(n_samples);
    double y = rng.normal() * sw * std::sqrt((1.0 - a) / (1.0 + a));
    for (int k = 0; k < n_samples; ++k) {
        y = a * y + gain * (rng.normal() * sw);
        buf[k] = y;
    }
    if (mode) {
        const int len = static_cast<int>(mode->size());
        const int beg = herald - len + 1;
        double bg = 0.0;
        for (int k = 0; k < len; ++k) bg += (*mode)[k] * buf[beg + k];
        bg *= dt;
        const double delta = target - bg;
        for (int k = 0; k < len; ++k) buf[beg + k] += delta * (*mode)[k];
    }
    std::vector<float> out(n_samples);
    for (int k = 0; k < n_samples; ++k) out[k] = static_cast<float>(buf[k]);
    return out;
}

}  // namespace

double background_variance(const ExperimentParams& params, double theta) {
    const double vs = 0.5 * std::pow(10.0, params.initial_squeezing_db / 10.0);
    const double va = 0.5 * std::pow(10.0, -params.initial_squeezing_db / 10.0);
    const double eta = params.eta_tot();
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return eta * (vs * c * c + va * s * s) + (1.0 - eta) * 0.5;
}

TraceSet synthesize_run(const ExperimentParams& params, int n_traces, std::uint64_t seed,
                        int n_calibration) {
    params.validate();
    if (n_traces < 1) {
        throw std::invalid_argument("synthesize_run: need at least one trace");
    }
    if (n_calibration < 1) {
        throw std::invalid_argument("synthesize_run: calibration set must be non-empty");
    }

    const double dt = 1.0 / params.sample_rate_hz;
    const int n_samples = static_cast<int>(std::lround(params.trace_duration_s / dt));
    if (n_samples < 16) {
        throw std::invalid_argument("synthesize_run: trace too short");
    }
    const int herald = n_samples / 2;  // herald at trace center
    const double gamma = M_PI * params.filter_gamma_over_pi_hz;
    if (8.0 / gamma > herald * dt) {
        throw std::invalid_argument(
            "synthesize_run: herald filter decay does not fit before the herald");
    }
    const double a = std::exp(-2.0 * M_PI * params.hd_bandwidth_hz * dt);

    // Injection kernel: causal exponential ending at the herald sample,
    // truncated once the tail is negligible (13 decay constants).
    const int inj_len =
        std::min(herald + 1, static_cast<int>(std::ceil(13.0 / (gamma * dt))));
    Eigen::VectorXd t_grid(inj_len);
    for (int k = 0; k < inj_len; ++k) t_grid[k] = (k - inj_len + 1) * dt;
    const TemporalMode inj_mode = temporal_mode(gamma, t_grid);
    std::vector<double> f(inj_mode.values.data(), inj_mode.values.data() + inj_len);
    const double sqrt_gain = std::sqrt(projection_gain(f, a, dt));

    // Quadrature samplers for the heralded state, one per LO-phase bin.
    const DensityMatrix rho = heralded_state(params, /*include_detection=*/true);
    std::vector<QuadratureSampler> samplers;
    samplers.reserve(kPhaseTables);
    for (int k = 0; k < kPhaseTables; ++k) {
        samplers.emplace_back(rho, (k + 0.5) * M_PI / kPhaseTables);
    }

    TraceSet set;
    set.params = params;
    set.traces.reserve(n_traces);
    set.calibration_traces.reserve(n_calibration);

    for (int i = 0; i < n_traces; ++i) {
        const double t_acq = i / params.herald_rate_hz;
        double theta = std::fmod(params.phase_ramp_rad_per_s * t_acq, 2.0 * M_PI);
        if (theta < 0.0) theta += 2.0 * M_PI;
        double theta_mod = std::fmod(theta, M_PI);
        const int bin = std::min(static_cast<int>(theta_mod / (M_PI / kPhaseTables)),
                                 kPhaseTables - 1);

        Rng rng(stream_seed(seed, static_cast<std::uint64_t>(i)));
        const double x_heralded = samplers[bin].sample(rng.uniform());

        HomodyneTrace tr;
        tr.sample_period_s = dt;
        tr.herald_index = herald;
        tr.acquisition_index = i;
        tr.true_phase_rad = theta;
        tr.has_true_phase = true;
        tr.samples = generate_trace(rng, background_variance(params, theta), n_samples, a,
                                    dt, herald, &f, x_heralded * sqrt_gain);
        set.traces.push_back(std::move(tr));
    }

    for (int j = 0; j < n_calibration; ++j) {
        Rng rng(stream_seed(seed, kCalibrationStream | static_cast<std::uint64_t>(j)));
        HomodyneTrace tr;
        tr.sample_period_s = dt;
        tr.herald_index = herald;
        tr.acquisition_index = j;
        tr.has_true_phase = false;
        tr.samples = generate_trace(rng, 0.5, n_samples, a, dt, herald, nullptr, 0.0);
        set.calibration_traces.push_back(std::move(tr));
    }
    return set;
}

}  // namespace cvtomo
