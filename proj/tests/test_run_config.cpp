#include "cvtomo/run_config.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

using namespace cvtomo;
namespace fs = std::filesystem;

TEST_CASE("default configuration is the published operating point") {
    RunConfig config;
    CHECK_NOTHROW(config.validate());
    CHECK(config.experiment.initial_squeezing_db == -5.39);
    CHECK(config.experiment.eta_wg == 0.69);
    CHECK(config.n_calibration_traces == 2000);
    CHECK(config.analysis.decimation == 8);
    CHECK(config.tomo.dim == 20);
    CHECK(config.tomo.iterations == 200);
    CHECK(config.tomo.eta_correction == "none");
    CHECK(config.grid.points == 201);
    CHECK(config.report.include_projection);
    CHECK(config.output_dir == "out");
}

TEST_CASE("configuration text round trips exactly") {
    SUBCASE("defaults") {
        const std::string text = serialize_run_config(RunConfig{});
        const RunConfig parsed = parse_run_config(text);
        CHECK(serialize_run_config(parsed) == text);
        // Exactly representable defaults keep their short spelling.
        CHECK(text.find("tomo.x_max = 6\n") != std::string::npos);
        CHECK(text.find("grid.points = 201\n") != std::string::npos);
        CHECK(text.find("tomo.eta_correction = none\n") != std::string::npos);
        CHECK(text.find("output.dir = out\n") != std::string::npos);
    }

    SUBCASE("doubles survive to the last bit") {
        RunConfig config;
        config.experiment.eta_wg = 0.6900000000000001;
        config.experiment.trace_duration_s = 4.9999999999999998e-6;
        config.experiment.phase_ramp_rad_per_s = 9.0 * M_PI / 5e-6 * 1.0000000001;
        config.experiment.rng_seed = 18446744073709551615ULL;
        config.tomo.x_bin_width = 0.1;
        config.report.projection_eta_wg = 0.97;
        const RunConfig parsed = parse_run_config(serialize_run_config(config));
        CHECK(parsed.experiment.eta_wg == config.experiment.eta_wg);
        CHECK(parsed.experiment.trace_duration_s == config.experiment.trace_duration_s);
        CHECK(parsed.experiment.phase_ramp_rad_per_s ==
              config.experiment.phase_ramp_rad_per_s);
        CHECK(parsed.experiment.rng_seed == 18446744073709551615ULL);
        CHECK(parsed.tomo.x_bin_width == config.tomo.x_bin_width);
        CHECK(parsed.report.projection_eta_wg == config.report.projection_eta_wg);
        CHECK(serialize_run_config(parsed) == serialize_run_config(config));
    }
}

TEST_CASE("configuration parsing") {
    SUBCASE("every section reaches its field") {
        const RunConfig c = parse_run_config(
            "optics.eta_s = 0.9\n"
            "optics.tap_reflectivity = 0.04\n"
            "herald.dark_rate_hz = 12.5\n"
            "acquisition.sample_rate_hz = 2e9\n"
            "acquisition.n_traces = 444\n"
            "numerics.rng_seed = 77\n"
            "analysis.decimation = 4\n"
            "analysis.fitted_mode_extraction = false\n"
            "tomo.iterations = 50\n"
            "tomo.eta_correction = hd\n"
            "grid.half_extent = 4.5\n"
            "report.include_projection = 0\n"
            "output.dir = runs/session-12\n");
        CHECK(c.experiment.eta_s == 0.9);
        CHECK(c.experiment.tap_reflectivity == 0.04);
        CHECK(c.experiment.dark_rate_hz == 12.5);
        CHECK(c.experiment.sample_rate_hz == 2e9);
        CHECK(c.experiment.n_traces == 444);
        CHECK(c.experiment.rng_seed == 77);
        CHECK(c.analysis.decimation == 4);
        CHECK_FALSE(c.analysis.fitted_mode_extraction);
        CHECK(c.tomo.iterations == 50);
        CHECK(c.tomo.eta_correction == "hd");
        CHECK(c.grid.half_extent == 4.5);
        CHECK_FALSE(c.report.include_projection);
        CHECK(c.output_dir == "runs/session-12");
    }

    SUBCASE("comments, blank lines and spacing are tolerated") {
        const RunConfig c = parse_run_config(
            "# run configuration\n"
            "\n"
            "   optics.eta_wg=0.75   # inline comment\n"
            "\t tomo.dim \t=\t 12 \n"
            "\n");
        CHECK(c.experiment.eta_wg == 0.75);
        CHECK(c.tomo.dim == 12);
    }

    SUBCASE("the last assignment of a repeated key wins") {
        const RunConfig c = parse_run_config("tomo.dim = 8\ntomo.dim = 14\n");
        CHECK(c.tomo.dim == 14);
    }

    SUBCASE("unknown keys are rejected with their line number") {
        CHECK_THROWS_WITH_AS(
            parse_run_config("optics.eta_wg = 0.7\n\noptics.eta_gw = 0.7\n"),
            doctest::Contains("'optics.eta_gw' on line 3"), std::invalid_argument);
    }

    SUBCASE("malformed lines and values are rejected") {
        CHECK_THROWS_WITH_AS(parse_run_config("optics.eta_wg 0.7\n"),
                             doctest::Contains("line 1"), std::invalid_argument);
        CHECK_THROWS_AS(parse_run_config("optics.eta_wg =\n"), std::invalid_argument);
        CHECK_THROWS_AS(parse_run_config("optics.eta_wg = fast\n"), std::invalid_argument);
        CHECK_THROWS_AS(parse_run_config("optics.eta_wg = 0.7x\n"), std::invalid_argument);
        CHECK_THROWS_AS(parse_run_config("tomo.dim = 12.5\n"), std::invalid_argument);
        CHECK_THROWS_AS(parse_run_config("analysis.fitted_mode_extraction = maybe\n"),
                        std::invalid_argument);
        CHECK_THROWS_AS(parse_run_config("tomo.eta_correction = detector\n"),
                        std::invalid_argument);
        CHECK_THROWS_AS(parse_run_config("numerics.rng_seed = -1\n"),
                        std::invalid_argument);
    }

    SUBCASE("out-of-range values fail validation at parse time") {
        CHECK_THROWS_AS(parse_run_config("optics.eta_wg = 1.2\n"), std::invalid_argument);
        CHECK_THROWS_AS(parse_run_config("acquisition.n_traces = 0\n"),
                        std::invalid_argument);
        CHECK_THROWS_AS(parse_run_config("tomo.dim = 1\n"), std::invalid_argument);
        CHECK_THROWS_AS(parse_run_config("grid.points = 1\n"), std::invalid_argument);
        CHECK_THROWS_AS(parse_run_config("analysis.bootstrap_samples = -1\n"),
                        std::invalid_argument);
        CHECK_THROWS_AS(parse_run_config("tomo.x_bin_width = 7\n"),
                        std::invalid_argument);  // wider than tomo.x_max
        CHECK_THROWS_AS(parse_run_config("report.projection_eta_wg = 0\n"),
                        std::invalid_argument);
        CHECK_THROWS_AS(parse_run_config("acquisition.n_calibration_traces = 0\n"),
                        std::invalid_argument);
    }
}

TEST_CASE("configuration files load like inline text") {
    const fs::path dir = fs::temp_directory_path() / "cvtomo-config-tests";
    fs::create_directories(dir);
    const fs::path path = dir / "run.cfg";

    RunConfig config;
    config.experiment.rng_seed = 424242;
    config.tomo.eta_correction = "hd";
    {
        std::ofstream out(path);
        out << serialize_run_config(config);
    }
    const RunConfig loaded = load_run_config(path.string());
    CHECK(loaded.experiment.rng_seed == 424242);
    CHECK(loaded.tomo.eta_correction == "hd");
    CHECK(serialize_run_config(loaded) == serialize_run_config(config));

    CHECK_THROWS_WITH_AS(load_run_config((dir / "missing.cfg").string()),
                         doctest::Contains("cannot open"), std::invalid_argument);
}
