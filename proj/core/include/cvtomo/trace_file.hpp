#pragma once

#include "cvtomo/traces.hpp"

#include <string>
#include <vector>

// Binary trace container ("HQTR"): magic, u16 format version (=1), u32 header
// length, UTF-8 JSON header (acquisition geometry, calibration flag, params
// snapshot, per-trace true phases when synthetic), then n_traces × n_samples
// little-endian float32 samples. Declared lengths must match the payload
// exactly; readers reject anything else.

namespace cvtomo {

struct TraceFileData {
    std::vector<HomodyneTrace> traces;
    ExperimentParams params;
    bool calibration = false;
};

// All traces must share length, sample period and herald index.
// Throws std::invalid_argument on inconsistent input, std::runtime_error on I/O.
void write_trace_file(const std::string& path, const std::vector<HomodyneTrace>& traces,
                      const ExperimentParams& params, bool calibration);

// Throws std::runtime_error on I/O failure or any structural mismatch
// (bad magic, unsupported version, truncated payload, malformed header).
TraceFileData read_trace_file(const std::string& path);

}  // namespace cvtomo
