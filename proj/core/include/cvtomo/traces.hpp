#pragma once

#include "cvtomo/experiment.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

// Sampled homodyne voltage records and their decimated block representation.
// Samples are stored as float32 (matching the on-disk format bit for bit);
// all arithmetic downstream happens in double after decimation.

namespace cvtomo {

struct HomodyneTrace {
    std::vector<float> samples;      // shot-noise-calibrated units
    double sample_period_s = 1e-9;
    int herald_index = 0;            // sample index of the heralding click
    int acquisition_index = 0;       // position in the acquisition sequence
    double true_phase_rad = 0.0;     // synthetic ground truth (simulation only)
    bool has_true_phase = false;
};

struct TraceSet {
    std::vector<HomodyneTrace> traces;
    std::vector<HomodyneTrace> calibration_traces;  // vacuum input
    ExperimentParams params;
};

// Block-averaged (decimated) view of a trace ensemble. Blocks are aligned so
// that one block ends exactly at the herald sample: block b covers samples
// [start + b·dec, start + (b+1)·dec) with start = (herald_index+1) mod dec,
// and herald_block is the block whose last sample is herald_index. Block
// averaging preserves exponential envelopes exactly (uniform scale factor),
// so mode shapes measured on blocks match the sample-rate shapes.
struct DecimatedEnsemble {
    Eigen::MatrixXd blocks;              // n_traces x n_blocks, block means
    int decimation = 1;
    int herald_block = 0;
    double dt = 1e-9;                    // block duration (decimation / sample_rate)
    std::vector<int> acquisition_index;  // per row
    std::vector<double> true_phase;      // per row; empty when unknown
};

DecimatedEnsemble decimate_traces(const std::vector<HomodyneTrace>& traces, int decimation);

}  // namespace cvtomo
