#include "cvtomo/trace_file.hpp"

#include "cvtomo/rng.hpp"
#include "cvtomo/synth.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace cvtomo;
namespace fs = std::filesystem;

namespace {

fs::path test_dir() {
    const fs::path dir = fs::temp_directory_path() / "cvtomo-tracefile-tests";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    return bytes;
}

void spit(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    REQUIRE(out.good());
}

std::uint32_t header_length(const std::string& bytes) {
    std::uint32_t len = 0;
    std::memcpy(&len, bytes.data() + 6, 4);
    return len;
}

// Re-issue a valid file with an edited JSON header, keeping the payload.
template <typename Fn>
std::string with_edited_header(const std::string& bytes, Fn&& edit) {
    const std::uint32_t len = header_length(bytes);
    nlohmann::json header = nlohmann::json::parse(bytes.substr(10, len));
    edit(header);
    const std::string text = header.dump();
    std::string out = bytes.substr(0, 6);
    const std::uint32_t new_len = static_cast<std::uint32_t>(text.size());
    out.append(reinterpret_cast<const char*>(&new_len), 4);
    out += text;
    out += bytes.substr(10 + len);
    return out;
}

// Three short traces with hand-picked values; the sample period is chosen so
// that its reciprocal (stored in the header) and the period itself both round
// trip through double exactly.
std::vector<HomodyneTrace> make_traces(bool with_phases) {
    Rng rng(940);
    std::vector<HomodyneTrace> traces(3);
    const double phases[3] = {0.3, 1.2, 2.9};
    for (int i = 0; i < 3; ++i) {
        HomodyneTrace& tr = traces[i];
        tr.sample_period_s = std::ldexp(1.0, -31);  // 2^-31 s: reciprocal is exact
        tr.herald_index = 40;
        tr.acquisition_index = i;
        tr.true_phase_rad = phases[i];
        tr.has_true_phase = with_phases;
        tr.samples.resize(64);
        for (auto& s : tr.samples) s = static_cast<float>(rng.normal());
        tr.samples[0] = 0.0f;
        tr.samples[1] = -0.0f;
        tr.samples[2] = 1.5f;
    }
    return traces;
}

ExperimentParams make_params() {
    ExperimentParams p;
    p.initial_squeezing_db = -4.2;
    p.eta_wg = 0.7;
    p.herald_rate_hz = 150e3;
    p.n_traces = 3;
    p.rng_seed = 18446744073709551615ULL;  // largest uint64 must survive JSON
    return p;
}

}  // namespace

TEST_CASE("trace files round trip bit for bit") {
    const fs::path path = test_dir() / "roundtrip.hqtr";
    const auto traces = make_traces(true);
    const ExperimentParams params = make_params();
    write_trace_file(path.string(), traces, params, false);

    SUBCASE("container layout is the documented one") {
        const std::string bytes = slurp(path);
        REQUIRE(bytes.size() > 10);
        CHECK(bytes.compare(0, 4, "HQTR") == 0);
        CHECK(bytes[4] == 1);  // version, little endian
        CHECK(bytes[5] == 0);
        const std::uint32_t len = header_length(bytes);
        const nlohmann::json header = nlohmann::json::parse(bytes.substr(10, len));
        CHECK(header.at("n_traces") == 3);
        CHECK(header.at("n_samples") == 64);
        CHECK(header.at("herald_index") == 40);
        CHECK(header.at("sample_rate_hz") == 2147483648.0);
        CHECK(header.at("calibration") == false);
        CHECK(header.at("true_phase").size() == 3);
        CHECK(header.at("params").at("eta_wg") == 0.7);
        // Payload is exactly n_traces * n_samples float32 values.
        CHECK(bytes.size() == 10 + len + 3 * 64 * 4);
    }

    SUBCASE("read returns exactly what was written") {
        const TraceFileData data = read_trace_file(path.string());
        CHECK_FALSE(data.calibration);
        REQUIRE(data.traces.size() == 3);
        for (int i = 0; i < 3; ++i) {
            const HomodyneTrace& got = data.traces[i];
            const HomodyneTrace& want = traces[i];
            REQUIRE(got.samples.size() == want.samples.size());
            CHECK(std::memcmp(got.samples.data(), want.samples.data(),
                              want.samples.size() * sizeof(float)) == 0);
            CHECK(got.sample_period_s == want.sample_period_s);
            CHECK(got.herald_index == want.herald_index);
            CHECK(got.acquisition_index == i);
            CHECK(got.has_true_phase);
            CHECK(got.true_phase_rad == want.true_phase_rad);
        }
        CHECK(data.params.initial_squeezing_db == params.initial_squeezing_db);
        CHECK(data.params.eta_wg == params.eta_wg);
        CHECK(data.params.eta_s == params.eta_s);
        CHECK(data.params.tap_reflectivity == params.tap_reflectivity);
        CHECK(data.params.eta_t == params.eta_t);
        CHECK(data.params.eta_pd == params.eta_pd);
        CHECK(data.params.eta_el == params.eta_el);
        CHECK(data.params.herald_rate_hz == params.herald_rate_hz);
        CHECK(data.params.dark_rate_hz == params.dark_rate_hz);
        CHECK(data.params.false_herald_fraction == params.false_herald_fraction);
        CHECK(data.params.filter_gamma_over_pi_hz == params.filter_gamma_over_pi_hz);
        CHECK(data.params.hd_bandwidth_hz == params.hd_bandwidth_hz);
        CHECK(data.params.sample_rate_hz == params.sample_rate_hz);
        CHECK(data.params.trace_duration_s == params.trace_duration_s);
        CHECK(data.params.phase_ramp_rad_per_s == params.phase_ramp_rad_per_s);
        CHECK(data.params.n_traces == params.n_traces);
        CHECK(data.params.fock_dim == params.fock_dim);
        CHECK(data.params.rng_seed == params.rng_seed);
    }

    SUBCASE("calibration files carry no ground-truth phases") {
        const fs::path cal_path = test_dir() / "calibration.hqtr";
        write_trace_file(cal_path.string(), traces, params, true);
        const TraceFileData data = read_trace_file(cal_path.string());
        CHECK(data.calibration);
        for (const auto& tr : data.traces) {
            CHECK_FALSE(tr.has_true_phase);
            CHECK(tr.true_phase_rad == 0.0);
        }
    }

    SUBCASE("phases are omitted unless every trace has one") {
        auto partial = make_traces(true);
        partial[1].has_true_phase = false;
        const fs::path p2 = test_dir() / "partial.hqtr";
        write_trace_file(p2.string(), partial, params, false);
        const TraceFileData data = read_trace_file(p2.string());
        for (const auto& tr : data.traces) CHECK_FALSE(tr.has_true_phase);
    }
}

TEST_CASE("synthesized runs survive the file format unchanged") {
    ExperimentParams p;
    p.trace_duration_s = 2e-7;
    p.filter_gamma_over_pi_hz = 60e6;
    p.n_traces = 3;
    const TraceSet run = synthesize_run(p, 3, 99, 2);

    const fs::path sig = test_dir() / "synth-signal.hqtr";
    const fs::path cal = test_dir() / "synth-cal.hqtr";
    write_trace_file(sig.string(), run.traces, run.params, false);
    write_trace_file(cal.string(), run.calibration_traces, run.params, true);

    const TraceFileData sig_data = read_trace_file(sig.string());
    const TraceFileData cal_data = read_trace_file(cal.string());
    REQUIRE(sig_data.traces.size() == 3);
    REQUIRE(cal_data.traces.size() == 2);
    CHECK(sig_data.params.filter_gamma_over_pi_hz == 60e6);
    for (size_t i = 0; i < 3; ++i) {
        const auto& got = sig_data.traces[i];
        const auto& want = run.traces[i];
        CHECK(std::memcmp(got.samples.data(), want.samples.data(),
                          want.samples.size() * sizeof(float)) == 0);
        CHECK(got.herald_index == want.herald_index);
        CHECK(got.true_phase_rad == want.true_phase_rad);
    }
    CHECK(std::memcmp(cal_data.traces[0].samples.data(),
                      run.calibration_traces[0].samples.data(),
                      run.calibration_traces[0].samples.size() * sizeof(float)) == 0);
}

TEST_CASE("trace writer rejects inconsistent input") {
    const ExperimentParams params = make_params();
    const fs::path path = test_dir() / "invalid.hqtr";

    CHECK_THROWS_AS(write_trace_file(path.string(), {}, params, false),
                    std::invalid_argument);

    auto ragged = make_traces(true);
    ragged[1].samples.resize(32);
    CHECK_THROWS_AS(write_trace_file(path.string(), ragged, params, false),
                    std::invalid_argument);

    auto offset = make_traces(true);
    offset[2].herald_index = 41;
    CHECK_THROWS_AS(write_trace_file(path.string(), offset, params, false),
                    std::invalid_argument);

    auto skewed = make_traces(true);
    skewed[0].sample_period_s = 1e-9;
    CHECK_THROWS_AS(write_trace_file(path.string(), skewed, params, false),
                    std::invalid_argument);

    CHECK_THROWS_AS(write_trace_file("/nonexistent-dir/x.hqtr", make_traces(true),
                                     params, false),
                    std::runtime_error);
}

TEST_CASE("trace reader rejects corrupt containers") {
    const fs::path path = test_dir() / "donor.hqtr";
    write_trace_file(path.string(), make_traces(true), make_params(), false);
    const std::string good = slurp(path);
    const fs::path bad = test_dir() / "corrupt.hqtr";

    SUBCASE("missing file") {
        CHECK_THROWS_AS(read_trace_file((test_dir() / "no-such.hqtr").string()),
                        std::runtime_error);
    }

    SUBCASE("bad magic") {
        std::string bytes = good;
        bytes[0] = 'X';
        spit(bad, bytes);
        CHECK_THROWS_WITH_AS(read_trace_file(bad.string()),
                             doctest::Contains("bad magic"), std::runtime_error);
    }

    SUBCASE("unsupported version") {
        std::string bytes = good;
        bytes[4] = 2;
        spit(bad, bytes);
        CHECK_THROWS_WITH_AS(read_trace_file(bad.string()),
                             doctest::Contains("version"), std::runtime_error);
    }

    SUBCASE("header length exceeds the file") {
        std::string bytes = good;
        bytes[9] = 0x7f;
        spit(bad, bytes);
        CHECK_THROWS_WITH_AS(read_trace_file(bad.string()),
                             doctest::Contains("truncated header"), std::runtime_error);
    }

    SUBCASE("garbage in the JSON header") {
        std::string bytes = good;
        bytes[10] = 'X';  // first header byte; no longer parses
        spit(bad, bytes);
        CHECK_THROWS_WITH_AS(read_trace_file(bad.string()),
                             doctest::Contains("malformed header"), std::runtime_error);
    }

    SUBCASE("required header key missing") {
        spit(bad, with_edited_header(good, [](nlohmann::json& h) { h.erase("n_traces"); }));
        CHECK_THROWS_WITH_AS(read_trace_file(bad.string()),
                             doctest::Contains("incomplete header"), std::runtime_error);
    }

    SUBCASE("herald outside the trace") {
        spit(bad, with_edited_header(good, [](nlohmann::json& h) {
                 h["herald_index"] = 64;
             }));
        CHECK_THROWS_WITH_AS(read_trace_file(bad.string()),
                             doctest::Contains("geometry"), std::runtime_error);
    }

    SUBCASE("truncated payload") {
        std::string bytes = good;
        bytes.resize(bytes.size() - 4);
        spit(bad, bytes);
        CHECK_THROWS_WITH_AS(read_trace_file(bad.string()),
                             doctest::Contains("payload size"), std::runtime_error);
    }

    SUBCASE("trailing bytes") {
        spit(bad, good + "zzzz");
        CHECK_THROWS_WITH_AS(read_trace_file(bad.string()),
                             doctest::Contains("payload size"), std::runtime_error);
    }

    SUBCASE("ground-truth phase list with the wrong length") {
        spit(bad, with_edited_header(good, [](nlohmann::json& h) {
                 h["true_phase"].push_back(9.9);
             }));
        CHECK_THROWS_WITH_AS(read_trace_file(bad.string()),
                             doctest::Contains("true_phase"), std::runtime_error);
    }
}
