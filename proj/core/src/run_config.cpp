#include "cvtomo/run_config.hpp"

#include "json_util.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace cvtomo {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad numeric value for " + key);
    }
    if (pos != value.size()) {
        throw std::invalid_argument("config: trailing characters in value for " + key);
    }
    return v;
}

long long parse_int(const std::string& key, const std::string& value) {
    size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(value, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer value for " + key);
    }
    if (pos != value.size()) {
        throw std::invalid_argument("config: trailing characters in value for " + key);
    }
    return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
    size_t pos = 0;
    std::uint64_t v = 0;
    // stoull would wrap a negative input around instead of failing.
    if (value.find('-') != std::string::npos) {
        throw std::invalid_argument("config: bad unsigned value for " + key);
    }
    try {
        v = std::stoull(value, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad unsigned value for " + key);
    }
    if (pos != value.size()) {
        throw std::invalid_argument("config: trailing characters in value for " + key);
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::invalid_argument("config: bad boolean value for " + key +
                                " (use true/false)");
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"optics.initial_squeezing_db",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.experiment.initial_squeezing_db = parse_double(k, v);
         }},
        {"optics.eta_wg",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.experiment.eta_wg = parse_double(k, v);
         }},
        {"optics.eta_s",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.experiment.eta_s = parse_double(k, v);
         }},
        {"optics.tap_reflectivity",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.experiment.tap_reflectivity = parse_double(k, v);
         }},
        {"optics.eta_t",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.experiment.eta_t = parse_double(k, v);
         }},
        {"optics.eta_pd",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.experiment.eta_pd = parse_double(k, v);
         }},
        {"optics.eta_el",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.experiment.eta_el = parse_double(k, v);
         }},
        {"herald.rate_hz",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.experiment.herald_rate_hz = parse_double(k, v);
         }},
        {"herald.dark_rate_hz",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.experiment.dark_rate_hz = parse_double(k, v);
         }},
        {"herald.false_fraction",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.experiment.false_herald_fraction = parse_double(k, v);
         }},
        {"acquisition.filter_gamma_over_pi_hz",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.experiment.filter_gamma_over_pi_hz = parse_double(k, v);
         }},
        {"acquisition.hd_bandwidth_hz",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.experiment.hd_bandwidth_hz = parse_double(k, v);
         }},
        {"acquisition.sample_rate_hz",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.experiment.sample_rate_hz = parse_double(k, v);
         }},
        {"acquisition.trace_duration_s",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.experiment.trace_duration_s = parse_double(k, v);
         }},
        {"acquisition.phase_ramp_rad_per_s",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.experiment.phase_ramp_rad_per_s = parse_double(k, v);
         }},
        {"acquisition.n_traces",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.experiment.n_traces = static_cast<int>(parse_int(k, v));
         }},
        {"acquisition.n_calibration_traces",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.n_calibration_traces = static_cast<int>(parse_int(k, v));
         }},
        {"numerics.fock_dim",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.experiment.fock_dim = static_cast<int>(parse_int(k, v));
         }},
        {"numerics.rng_seed",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.experiment.rng_seed = parse_uint(k, v);
         }},
        {"analysis.mode_window_s",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.analysis.mode_window_s = parse_double(k, v);
         }},
        {"analysis.decimation",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.analysis.decimation = static_cast<int>(parse_int(k, v));
         }},
        {"analysis.margin_blocks",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.analysis.margin_blocks = static_cast<int>(parse_int(k, v));
         }},
        {"analysis.n_background_records",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.analysis.n_background_records = static_cast<int>(parse_int(k, v));
         }},
        {"analysis.phase_fit_halfwidth",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.analysis.phase_fit_halfwidth = static_cast<int>(parse_int(k, v));
         }},
        {"analysis.min_background_slots",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.analysis.min_background_slots = static_cast<int>(parse_int(k, v));
         }},
        {"analysis.n_phase_bins",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.analysis.n_phase_bins = static_cast<int>(parse_int(k, v));
         }},
        {"analysis.bootstrap_samples",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.analysis.bootstrap_samples = static_cast<int>(parse_int(k, v));
         }},
        {"analysis.fitted_mode_extraction",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.analysis.fitted_mode_extraction = parse_bool(k, v);
         }},
        {"tomo.dim",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.tomo.dim = static_cast<int>(parse_int(k, v));
         }},
        {"tomo.iterations",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.tomo.iterations = static_cast<int>(parse_int(k, v));
         }},
        {"tomo.n_phase_bins",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.tomo.n_phase_bins = static_cast<int>(parse_int(k, v));
         }},
        {"tomo.x_max",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.tomo.x_max = parse_double(k, v);
         }},
        {"tomo.x_bin_width",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.tomo.x_bin_width = parse_double(k, v);
         }},
        {"tomo.eta_correction",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             if (v != "none" && v != "hd") {
                 throw std::invalid_argument("config: " + k + " must be 'none' or 'hd'");
             }
             c.tomo.eta_correction = v;
         }},
        {"grid.half_extent",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.grid.half_extent = parse_double(k, v);
         }},
        {"grid.points",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.grid.points = static_cast<int>(parse_int(k, v));
         }},
        {"report.include_projection",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.report.include_projection = parse_bool(k, v);
         }},
        {"report.projection_eta_wg",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.report.projection_eta_wg = parse_double(k, v);
         }},
        {"output.dir",
         [](RunConfig& c, const std::string&, const std::string& v) {
             c.output_dir = v;
         }},
    };
    return table;
}

}  // namespace

void RunConfig::validate() const {
    experiment.validate();
    if (n_calibration_traces < 1) {
        throw std::invalid_argument("config: acquisition.n_calibration_traces must be >= 1");
    }
    if (analysis.mode_window_s <= 0.0) {
        throw std::invalid_argument("config: analysis.mode_window_s must be > 0");
    }
    if (analysis.decimation < 1) {
        throw std::invalid_argument("config: analysis.decimation must be >= 1");
    }
    if (analysis.margin_blocks < 0) {
        throw std::invalid_argument("config: analysis.margin_blocks must be >= 0");
    }
    if (analysis.n_background_records < 1) {
        throw std::invalid_argument("config: analysis.n_background_records must be >= 1");
    }
    if (analysis.phase_fit_halfwidth < 1) {
        throw std::invalid_argument("config: analysis.phase_fit_halfwidth must be >= 1");
    }
    if (analysis.min_background_slots < 2) {
        throw std::invalid_argument("config: analysis.min_background_slots must be >= 2");
    }
    if (analysis.n_phase_bins < 4) {
        throw std::invalid_argument("config: analysis.n_phase_bins must be >= 4");
    }
    if (analysis.bootstrap_samples < 0) {
        throw std::invalid_argument("config: analysis.bootstrap_samples must be >= 0");
    }
    if (tomo.dim < 2) throw std::invalid_argument("config: tomo.dim must be >= 2");
    if (tomo.iterations < 1) {
        throw std::invalid_argument("config: tomo.iterations must be >= 1");
    }
    if (tomo.n_phase_bins < 4) {
        throw std::invalid_argument("config: tomo.n_phase_bins must be >= 4");
    }
    if (tomo.x_max <= 0.0 || tomo.x_bin_width <= 0.0 || tomo.x_bin_width > tomo.x_max) {
        throw std::invalid_argument("config: bad tomo x binning");
    }
    if (grid.half_extent <= 0.0) {
        throw std::invalid_argument("config: grid.half_extent must be > 0");
    }
    if (grid.points < 2) throw std::invalid_argument("config: grid.points must be >= 2");
    if (report.projection_eta_wg <= 0.0 || report.projection_eta_wg > 1.0) {
        throw std::invalid_argument("config: report.projection_eta_wg must lie in (0, 1]");
    }
    if (output_dir.empty()) throw std::invalid_argument("config: output.dir must not be empty");
}

RunConfig parse_run_config(const std::string& text) {
    RunConfig config;
    const auto& table = setters();
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                        " is not of the form key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = table.find(key);
        if (it == table.end()) {
            throw std::invalid_argument("config: unknown key '" + key + "' on line " +
                                        std::to_string(line_no));
        }
        if (value.empty()) {
            throw std::invalid_argument("config: empty value for " + key);
        }
        it->second(config, key, value);
    }
    config.validate();
    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("config: cannot open " + path);
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str());
}

std::string serialize_run_config(const RunConfig& c) {
    std::ostringstream out;
    const auto d = [&](const char* key, double v) {
        out << key << " = " << format_double(v) << "\n";
    };
    const auto i = [&](const char* key, long long v) { out << key << " = " << v << "\n"; };
    const auto b = [&](const char* key, bool v) {
        out << key << " = " << (v ? "true" : "false") << "\n";
    };
    const auto s = [&](const char* key, const std::string& v) {
        out << key << " = " << v << "\n";
    };

    d("optics.initial_squeezing_db", c.experiment.initial_squeezing_db);
    d("optics.eta_wg", c.experiment.eta_wg);
    d("optics.eta_s", c.experiment.eta_s);
    d("optics.tap_reflectivity", c.experiment.tap_reflectivity);
    d("optics.eta_t", c.experiment.eta_t);
    d("optics.eta_pd", c.experiment.eta_pd);
    d("optics.eta_el", c.experiment.eta_el);
    d("herald.rate_hz", c.experiment.herald_rate_hz);
    d("herald.dark_rate_hz", c.experiment.dark_rate_hz);
    d("herald.false_fraction", c.experiment.false_herald_fraction);
    d("acquisition.filter_gamma_over_pi_hz", c.experiment.filter_gamma_over_pi_hz);
    d("acquisition.hd_bandwidth_hz", c.experiment.hd_bandwidth_hz);
    d("acquisition.sample_rate_hz", c.experiment.sample_rate_hz);
    d("acquisition.trace_duration_s", c.experiment.trace_duration_s);
    d("acquisition.phase_ramp_rad_per_s", c.experiment.phase_ramp_rad_per_s);
    i("acquisition.n_traces", c.experiment.n_traces);
    i("acquisition.n_calibration_traces", c.n_calibration_traces);
    i("numerics.fock_dim", c.experiment.fock_dim);
    out << "numerics.rng_seed = " << c.experiment.rng_seed << "\n";
    d("analysis.mode_window_s", c.analysis.mode_window_s);
    i("analysis.decimation", c.analysis.decimation);
    i("analysis.margin_blocks", c.analysis.margin_blocks);
    i("analysis.n_background_records", c.analysis.n_background_records);
    i("analysis.phase_fit_halfwidth", c.analysis.phase_fit_halfwidth);
    i("analysis.min_background_slots", c.analysis.min_background_slots);
    i("analysis.n_phase_bins", c.analysis.n_phase_bins);
    i("analysis.bootstrap_samples", c.analysis.bootstrap_samples);
    b("analysis.fitted_mode_extraction", c.analysis.fitted_mode_extraction);
    i("tomo.dim", c.tomo.dim);
    i("tomo.iterations", c.tomo.iterations);
    i("tomo.n_phase_bins", c.tomo.n_phase_bins);
    d("tomo.x_max", c.tomo.x_max);
    d("tomo.x_bin_width", c.tomo.x_bin_width);
    s("tomo.eta_correction", c.tomo.eta_correction);
    d("grid.half_extent", c.grid.half_extent);
    i("grid.points", c.grid.points);
    b("report.include_projection", c.report.include_projection);
    d("report.projection_eta_wg", c.report.projection_eta_wg);
    s("output.dir", c.output_dir);
    return out.str();
}

nlohmann::json experiment_params_to_json(const ExperimentParams& p) {
    nlohmann::json j;
    j["initial_squeezing_db"] = p.initial_squeezing_db;
    j["eta_wg"] = p.eta_wg;
    j["eta_s"] = p.eta_s;
    j["tap_reflectivity"] = p.tap_reflectivity;
    j["eta_t"] = p.eta_t;
    j["eta_pd"] = p.eta_pd;
    j["eta_el"] = p.eta_el;
    j["herald_rate_hz"] = p.herald_rate_hz;
    j["dark_rate_hz"] = p.dark_rate_hz;
    j["false_herald_fraction"] = p.false_herald_fraction;
    j["filter_gamma_over_pi_hz"] = p.filter_gamma_over_pi_hz;
    j["hd_bandwidth_hz"] = p.hd_bandwidth_hz;
    j["sample_rate_hz"] = p.sample_rate_hz;
    j["trace_duration_s"] = p.trace_duration_s;
    j["phase_ramp_rad_per_s"] = p.phase_ramp_rad_per_s;
    j["n_traces"] = p.n_traces;
    j["fock_dim"] = p.fock_dim;
    j["rng_seed"] = p.rng_seed;
    // Derived products, informational only (ignored on read).
    j["derived"] = {{"eta_hd", p.eta_hd()},
                    {"eta_tot", p.eta_tot()},
                    {"false_fraction", p.false_fraction()}};
    return j;
}

ExperimentParams experiment_params_from_json(const nlohmann::json& j) {
    ExperimentParams p;
    p.initial_squeezing_db = j.at("initial_squeezing_db").get<double>();
    p.eta_wg = j.at("eta_wg").get<double>();
    p.eta_s = j.at("eta_s").get<double>();
    p.tap_reflectivity = j.at("tap_reflectivity").get<double>();
    p.eta_t = j.at("eta_t").get<double>();
    p.eta_pd = j.at("eta_pd").get<double>();
    p.eta_el = j.at("eta_el").get<double>();
    p.herald_rate_hz = j.at("herald_rate_hz").get<double>();
    p.dark_rate_hz = j.at("dark_rate_hz").get<double>();
    p.false_herald_fraction = j.at("false_herald_fraction").get<double>();
    p.filter_gamma_over_pi_hz = j.at("filter_gamma_over_pi_hz").get<double>();
    p.hd_bandwidth_hz = j.at("hd_bandwidth_hz").get<double>();
    p.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    p.trace_duration_s = j.at("trace_duration_s").get<double>();
    p.phase_ramp_rad_per_s = j.at("phase_ramp_rad_per_s").get<double>();
    p.n_traces = j.at("n_traces").get<int>();
    p.fock_dim = j.at("fock_dim").get<int>();
    p.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    return p;
}

nlohmann::json run_config_to_json(const RunConfig& c) {
    nlohmann::json j;
    j["experiment"] = experiment_params_to_json(c.experiment);
    j["acquisition"] = {{"n_calibration_traces", c.n_calibration_traces}};
    j["analysis"] = {{"mode_window_s", c.analysis.mode_window_s},
                     {"decimation", c.analysis.decimation},
                     {"margin_blocks", c.analysis.margin_blocks},
                     {"n_background_records", c.analysis.n_background_records},
                     {"phase_fit_halfwidth", c.analysis.phase_fit_halfwidth},
                     {"min_background_slots", c.analysis.min_background_slots},
                     {"n_phase_bins", c.analysis.n_phase_bins},
                     {"bootstrap_samples", c.analysis.bootstrap_samples},
                     {"fitted_mode_extraction", c.analysis.fitted_mode_extraction}};
    j["tomo"] = {{"dim", c.tomo.dim},
                 {"iterations", c.tomo.iterations},
                 {"n_phase_bins", c.tomo.n_phase_bins},
                 {"x_max", c.tomo.x_max},
                 {"x_bin_width", c.tomo.x_bin_width},
                 {"eta_correction", c.tomo.eta_correction}};
    j["grid"] = {{"half_extent", c.grid.half_extent}, {"points", c.grid.points}};
    j["report"] = {{"include_projection", c.report.include_projection},
                   {"projection_eta_wg", c.report.projection_eta_wg}};
    j["output"] = {{"dir", c.output_dir}};
    return j;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

nlohmann::json read_json_file(const std::string& path) {
    const std::string text = read_text_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed JSON in " + path + ": " + e.what());
    }
}

}  // namespace cvtomo
