#include "cvtomo/trace_file.hpp"

#include "json_util.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "trace files are little-endian; big-endian hosts are not supported");
static_assert(sizeof(float) == 4, "float32 payload requires 4-byte float");

namespace cvtomo {

namespace {

constexpr char kMagic[4] = {'H', 'Q', 'T', 'R'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void write_le(std::ofstream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    return value;
}

}  // namespace

void write_trace_file(const std::string& path, const std::vector<HomodyneTrace>& traces,
                      const ExperimentParams& params, bool calibration) {
    if (traces.empty()) {
        throw std::invalid_argument("write_trace_file: no traces");
    }
    const size_t n_samples = traces.front().samples.size();
    const double sp = traces.front().sample_period_s;
    const int herald = traces.front().herald_index;
    bool all_phases = !calibration;
    for (const auto& tr : traces) {
        if (tr.samples.size() != n_samples || tr.herald_index != herald ||
            tr.sample_period_s != sp) {
            throw std::invalid_argument(
                "write_trace_file: traces must share length, sample period and herald index");
        }
        all_phases = all_phases && tr.has_true_phase;
    }

    nlohmann::json header;
    header["sample_rate_hz"] = 1.0 / sp;
    header["n_samples"] = n_samples;
    header["n_traces"] = traces.size();
    header["herald_index"] = herald;
    header["calibration"] = calibration;
    header["params"] = experiment_params_to_json(params);
    if (all_phases) {
        nlohmann::json phases = nlohmann::json::array();
        for (const auto& tr : traces) phases.push_back(tr.true_phase_rad);
        header["true_phase"] = std::move(phases);
    }
    const std::string header_text = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_trace_file: cannot open " + path);
    out.write(kMagic, 4);
    write_le<std::uint16_t>(out, kVersion);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(header_text.size()));
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    for (const auto& tr : traces) {
        out.write(reinterpret_cast<const char*>(tr.samples.data()),
                  static_cast<std::streamsize>(n_samples * sizeof(float)));
    }
    if (!out) throw std::runtime_error("write_trace_file: write failed for " + path);
}

TraceFileData read_trace_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_trace_file: cannot open " + path);
    in.seekg(0, std::ios::end);
    const std::int64_t file_size = in.tellg();
    in.seekg(0, std::ios::beg);

    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("read_trace_file: bad magic in " + path);
    }
    const std::uint16_t version = read_le<std::uint16_t>(in);
    if (version != kVersion) {
        throw std::runtime_error("read_trace_file: unsupported format version " +
                                 std::to_string(version));
    }
    const std::uint32_t header_len = read_le<std::uint32_t>(in);
    if (!in || 10 + static_cast<std::int64_t>(header_len) > file_size) {
        throw std::runtime_error("read_trace_file: truncated header in " + path);
    }
    std::string header_text(header_len, '\0');
    in.read(header_text.data(), header_len);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("read_trace_file: malformed header JSON: " +
                                 std::string(e.what()));
    }

    TraceFileData data;
    std::int64_t n_traces = 0;
    std::int64_t n_samples = 0;
    double sample_rate = 0.0;
    int herald = 0;
    try {
        sample_rate = header.at("sample_rate_hz").get<double>();
        n_samples = header.at("n_samples").get<std::int64_t>();
        n_traces = header.at("n_traces").get<std::int64_t>();
        herald = header.at("herald_index").get<int>();
        data.calibration = header.at("calibration").get<bool>();
        data.params = experiment_params_from_json(header.at("params"));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("read_trace_file: incomplete header: " +
                                 std::string(e.what()));
    }
    if (n_traces < 1 || n_samples < 1 || sample_rate <= 0.0 || herald < 0 ||
        herald >= n_samples) {
        throw std::runtime_error("read_trace_file: inconsistent header geometry");
    }

    const std::int64_t payload = n_traces * n_samples * 4;
    if (10 + static_cast<std::int64_t>(header_len) + payload != file_size) {
        throw std::runtime_error("read_trace_file: payload size mismatch in " + path);
    }

    std::vector<double> phases;
    if (header.contains("true_phase")) {
        const auto& arr = header["true_phase"];
        if (!arr.is_array() || static_cast<std::int64_t>(arr.size()) != n_traces) {
            throw std::runtime_error("read_trace_file: true_phase length mismatch");
        }
        phases.reserve(arr.size());
        for (const auto& v : arr) phases.push_back(v.get<double>());
    }

    data.traces.resize(n_traces);
    const double sp = 1.0 / sample_rate;
    for (std::int64_t i = 0; i < n_traces; ++i) {
        HomodyneTrace& tr = data.traces[i];
        tr.samples.resize(n_samples);
        in.read(reinterpret_cast<char*>(tr.samples.data()),
                static_cast<std::streamsize>(n_samples * sizeof(float)));
        tr.sample_period_s = sp;
        tr.herald_index = herald;
        tr.acquisition_index = static_cast<int>(i);
        if (!phases.empty()) {
            tr.true_phase_rad = phases[i];
            tr.has_true_phase = true;
        }
    }
    if (!in) throw std::runtime_error("read_trace_file: payload read failed for " + path);
    return data;
}

}  // namespace cvtomo
