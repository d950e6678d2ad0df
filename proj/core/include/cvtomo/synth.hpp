#pragma once

#include "cvtomo/experiment.hpp"
#include "cvtomo/traces.hpp"

#include <cstdint>

// Synthetic CW homodyne traces. Each trace is band-limited Gaussian noise at
// the phase-dependent squeezed-vacuum background variance, with the heralded
// wavepacket embedded by replacing the f-mode component in a window ending at
// the herald sample by a draw from the heralded state's quadrature
// distribution. Calibration traces are vacuum-variance noise with no
// injection. Generation is deterministic given (seed, acquisition index), so
// traces can be produced in any order or in parallel with identical results.

namespace cvtomo {

// Per-mode background variance seen by the detector at LO phase theta:
// squeezed vacuum degraded by the total path efficiency eta_tot, with the
// squeezing axis at theta = 0.
double background_variance(const ExperimentParams& params, double theta);

TraceSet synthesize_run(const ExperimentParams& params, int n_traces, std::uint64_t seed,
                        int n_calibration = 2000);

}  // namespace cvtomo
