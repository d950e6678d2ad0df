#include "cvtomo/pipeline.hpp"

#include "cvtomo/fock.hpp"
#include "cvtomo/rng.hpp"
#include "cvtomo/wigner.hpp"

#include <doctest.h>
#include <json.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace cvtomo;
namespace fs = std::filesystem;

namespace {

fs::path test_dir(const std::string& leaf) {
    const fs::path dir = fs::temp_directory_path() / "cvtomo-pipeline-tests" / leaf;
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char ch : text) n += (ch == '\n');
    return n;
}

}  // namespace

TEST_CASE("quadrature record files round trip") {
    const fs::path path = test_dir("records") / "records.csv";

    SUBCASE("values survive exactly") {
        std::vector<QuadratureRecord> recs(4);
        recs[0] = {-0.0, 0.0, 0};
        recs[1] = {1.25e-17, 3.141592653589793, 12};
        recs[2] = {-8.75, 0.0009765625, 4096};
        recs[3] = {123456.78125, 1.5707963267948966, -3};
        write_records_csv(path.string(), recs);

        const std::string text = slurp(path);
        CHECK(text.rfind("x,theta,trace_index\n", 0) == 0);
        CHECK(count_lines(text) == 5);

        const auto back = read_records_csv(path.string());
        REQUIRE(back.size() == 4);
        for (size_t i = 0; i < 4; ++i) {
            CHECK(back[i].x == recs[i].x);
            CHECK(back[i].theta == recs[i].theta);
            CHECK(back[i].trace_index == recs[i].trace_index);
        }
    }

    SUBCASE("corrupt files are rejected") {
        CHECK_THROWS_AS(read_records_csv((test_dir("records") / "nope.csv").string()),
                        std::runtime_error);

        std::ofstream(path) << "";
        CHECK_THROWS_WITH_AS(read_records_csv(path.string()),
                             doctest::Contains("empty"), std::runtime_error);

        std::ofstream(path, std::ios::trunc) << "x,theta,trace_index\n";
        CHECK_THROWS_WITH_AS(read_records_csv(path.string()),
                             doctest::Contains("no data rows"), std::runtime_error);

        std::ofstream(path, std::ios::trunc)
            << "x,theta,trace_index\n0.5,0.2,1\nwhat even is this\n";
        CHECK_THROWS_WITH_AS(read_records_csv(path.string()),
                             doctest::Contains("line 3"), std::runtime_error);

        std::ofstream(path, std::ios::trunc) << "x,theta,trace_index\n0.5,0.2\n";
        CHECK_THROWS_AS(read_records_csv(path.string()), std::runtime_error);
    }
}

TEST_CASE("density-matrix files round trip") {
    const fs::path dir = test_dir("rho");
    const fs::path path = dir / "rho.json";
    const RunConfig config;

    DensityMatrix rho = DensityMatrix::Zero(3, 3);
    rho(0, 0) = 0.6;
    rho(1, 1) = 0.3;
    rho(2, 2) = 0.1;
    rho(0, 1) = complexd(0.25, -0.125);
    rho(1, 0) = std::conj(rho(0, 1));
    rho(1, 2) = complexd(-0.0625, 0.03125);
    rho(2, 1) = std::conj(rho(1, 2));

    SUBCASE("write then read is the identity") {
        write_density_matrix_json(path.string(), rho, 0.72192, config, -123.456, 88);
        double eta = 0.0;
        const DensityMatrix back = read_density_matrix_json(path.string(), &eta);
        REQUIRE(back.rows() == 3);
        CHECK((back - rho).cwiseAbs().maxCoeff() == 0.0);
        CHECK(eta == 0.72192);

        const nlohmann::json j = nlohmann::json::parse(slurp(path));
        CHECK(j.at("dim") == 3);
        CHECK(j.at("real").size() == 9);
        CHECK(j.at("imag").size() == 9);
        CHECK(j.at("iterations") == 88);
        CHECK(j.at("loglik_final") == -123.456);
        CHECK(j.at("config").at("experiment").at("eta_wg") == 0.69);
    }

    SUBCASE("a missing eta defaults to uncorrected") {
        write_density_matrix_json(path.string(), rho, 0.5, config, 0.0, 1);
        nlohmann::json j = nlohmann::json::parse(slurp(path));
        j.erase("eta");
        std::ofstream(path, std::ios::trunc) << j.dump();
        double eta = 0.0;
        read_density_matrix_json(path.string(), &eta);
        CHECK(eta == 1.0);
    }

    SUBCASE("structural damage is rejected") {
        CHECK_THROWS_AS(read_density_matrix_json((dir / "nope.json").string(), nullptr),
                        std::runtime_error);

        std::ofstream(path, std::ios::trunc) << "{not json";
        CHECK_THROWS_AS(read_density_matrix_json(path.string(), nullptr),
                        std::runtime_error);

        write_density_matrix_json(path.string(), rho, 1.0, config, 0.0, 1);
        nlohmann::json j = nlohmann::json::parse(slurp(path));

        nlohmann::json wrong_dim = j;
        wrong_dim["dim"] = 5;
        std::ofstream(path, std::ios::trunc) << wrong_dim.dump();
        CHECK_THROWS_WITH_AS(read_density_matrix_json(path.string(), nullptr),
                             doctest::Contains("do not match"), std::runtime_error);

        nlohmann::json short_real = j;
        short_real["real"].erase(short_real["real"].size() - 1);
        std::ofstream(path, std::ios::trunc) << short_real.dump();
        CHECK_THROWS_AS(read_density_matrix_json(path.string(), nullptr),
                        std::runtime_error);

        nlohmann::json no_dim = j;
        no_dim.erase("dim");
        std::ofstream(path, std::ios::trunc) << no_dim.dump();
        CHECK_THROWS_AS(read_density_matrix_json(path.string(), nullptr),
                        std::runtime_error);
    }
}

TEST_CASE("the report stage renders a written state") {
    RunConfig config;
    config.output_dir = test_dir("report").string();
    config.grid.half_extent = 4.0;
    config.grid.points = 41;

    DensityMatrix vacuum = DensityMatrix::Zero(20, 20);
    vacuum(0, 0) = 1.0;
    const fs::path rho_path = fs::path(config.output_dir) / "rho.json";
    write_density_matrix_json(rho_path.string(), vacuum, 1.0, config, 0.0, 0);

    const ReportOutput out = run_report(config, rho_path.string());
    CHECK(out.w_origin == doctest::Approx(1.0 / M_PI).epsilon(1e-12));

    // Wigner CSV: one header row of x values plus one row per p value, each
    // data row holding the p value and `points` samples.
    const std::string csv = slurp(out.wigner_path);
    CHECK(count_lines(csv) == 1 + 41);
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header.front() == ',');  // empty corner cell
    CHECK(std::count(header.begin(), header.end(), ',') == 41);

    const nlohmann::json rep = nlohmann::json::parse(slurp(out.summary_path));
    CHECK(rep.at("w_origin_grid").get<double>() ==
          doctest::Approx(1.0 / M_PI).epsilon(1e-9));
    CHECK(rep.at("grid_integral").get<double>() == doctest::Approx(1.0).epsilon(5e-3));
    CHECK(rep.at("purity").get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.at("mean_photon_number").get<double>() ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rep.at("populations")[0].get<double>() == 1.0);
    CHECK(std::abs(rep.at("squeezing").at("sq_db").get<double>()) < 1e-9);
    CHECK(rep.at("model").at("detection_included").get<bool>());
    const double model_fid = rep.at("model").at("fidelity").get<double>();
    CHECK(model_fid > 0.0);
    CHECK(model_fid < 1.0);

    // The projection block depends only on the configuration, so its value
    // is a fixed model number for the default improved-coupling setting.
    CHECK(rep.at("projection").at("eta_wg").get<double>() == 0.97);
    CHECK(rep.at("projection").at("w_origin").get<double>() ==
          doctest::Approx(-0.220047).epsilon(0.01));

    SUBCASE("the projection block can be disabled") {
        RunConfig quiet = config;
        quiet.report.include_projection = false;
        const ReportOutput again = run_report(quiet, rho_path.string());
        const nlohmann::json j = nlohmann::json::parse(slurp(again.summary_path));
        CHECK_FALSE(j.contains("projection"));
    }
}

TEST_CASE("tomography rejects records with poor phase coverage") {
    RunConfig config;
    config.output_dir = test_dir("coverage").string();
    config.tomo.dim = 10;

    // Phases spanning 1.4 rad occupy fewer than half of the 60 phase bins,
    // which is the documented rejection threshold.
    Rng rng(5150);
    std::vector<QuadratureRecord> recs(2000);
    for (int i = 0; i < 2000; ++i) {
        recs[i].x = 0.7 * rng.normal();
        recs[i].theta = (i % 280) * 0.005;
        recs[i].trace_index = i;
    }
    const fs::path path = fs::path(config.output_dir) / "records.csv";
    write_records_csv(path.string(), recs);
    CHECK_THROWS_AS(run_tomo(config, path.string()), std::invalid_argument);
}

TEST_CASE("the pipeline stages chain into each other") {
    RunConfig config;
    config.output_dir = test_dir("chain").string();
    config.experiment.n_traces = 400;
    config.experiment.rng_seed = 24601;
    config.n_calibration_traces = 150;
    config.analysis.bootstrap_samples = 40;
    config.tomo.iterations = 60;
    config.tomo.eta_correction = "hd";

    const SimulateOutput sim = run_simulate(config);
    REQUIRE(fs::exists(sim.traces_path));
    REQUIRE(fs::exists(sim.calibration_path));
    {
        const nlohmann::json j = nlohmann::json::parse(slurp(sim.summary_path));
        CHECK(j.at("n_traces") == 400);
        CHECK(j.at("n_calibration_traces") == 150);
        CHECK(j.at("n_samples") == 5000);
        CHECK(j.at("herald_index") == 2500);
        CHECK(j.at("config").at("experiment").at("rng_seed") == 24601);
    }

    SUBCASE("swapped or missing inputs are refused") {
        CHECK_THROWS_AS(run_analyze(config, sim.calibration_path, sim.calibration_path),
                        std::invalid_argument);
        CHECK_THROWS_AS(run_analyze(config, sim.traces_path, sim.traces_path),
                        std::invalid_argument);
        CHECK_THROWS_AS(run_analyze(config, sim.traces_path, ""), std::invalid_argument);
        CHECK_THROWS_AS(
            run_analyze(config, (fs::path(config.output_dir) / "nope.hqtr").string(),
                        sim.calibration_path),
            std::runtime_error);
    }

    SUBCASE("analyze, tomo and report consume each other's files") {
        const AnalyzeOutput ana = run_analyze(config, sim.traces_path, sim.calibration_path);
        CHECK(fs::exists(ana.mode_path));
        CHECK(fs::exists(ana.spectrum_path));
        CHECK(fs::exists(ana.background_path));
        CHECK(count_lines(slurp(ana.records_path)) == 1 + 400);
        {
            const nlohmann::json j = nlohmann::json::parse(slurp(ana.summary_path));
            CHECK(j.at("n_heralded_records") == 400);
            CHECK(j.at("n_background_records") == 8 * 400);
            CHECK(j.at("window_blocks") == 31);
            CHECK_FALSE(j.at("phases_from_ramp_fallback").get<bool>());
            CHECK(j.at("phase_rms_rad").get<double>() < 0.25);
            CHECK(j.at("mode_fit").at("gamma_over_pi_hz").get<double>() ==
                  doctest::Approx(9.75e6).epsilon(0.40));
        }

        const TomoOutput tomo = run_tomo(config, ana.records_path);
        CHECK(tomo.result.povm_efficiency == doctest::Approx(0.72192).epsilon(1e-12));
        double eta = 0.0;
        const DensityMatrix rho = read_density_matrix_json(tomo.rho_path, &eta);
        CHECK(eta == doctest::Approx(0.72192).epsilon(1e-12));
        REQUIRE(rho.rows() == 20);
        CHECK(rho.trace().real() == doctest::Approx(1.0).epsilon(1e-9));
        Eigen::SelfAdjointEigenSolver<DensityMatrix> es(rho);
        CHECK(es.eigenvalues().minCoeff() > -1e-9);

        // Iteration log: 1-based indices, nondecreasing likelihood.
        const std::string loglik = slurp(tomo.loglik_path);
        std::istringstream lines(loglik);
        std::string line;
        std::getline(lines, line);
        CHECK(line == "iteration,loglik");
        std::vector<double> history;
        int index = 0;
        while (std::getline(lines, line)) {
            ++index;
            const auto comma = line.find(',');
            REQUIRE(comma != std::string::npos);
            CHECK(std::stoi(line.substr(0, comma)) == index);
            history.push_back(std::stod(line.substr(comma + 1)));
        }
        REQUIRE(history.size() >= 2);
        CHECK(history.size() <= 60);
        for (size_t k = 1; k < history.size(); ++k) {
            CHECK(history[k] >=
                  history[k - 1] - 1e-10 * std::max(1.0, std::abs(history[k - 1])));
        }

        RunConfig rep_config = config;
        rep_config.grid.points = 41;
        const ReportOutput rep = run_report(rep_config, tomo.rho_path);
        CHECK(fs::exists(rep.wigner_path));
        const nlohmann::json j = nlohmann::json::parse(slurp(rep.summary_path));
        CHECK(j.at("povm_efficiency").get<double>() ==
              doctest::Approx(0.72192).epsilon(1e-12));
        CHECK_FALSE(j.at("model").at("detection_included").get<bool>());
        CHECK(std::isfinite(j.at("grid_integral").get<double>()));
        CHECK(std::abs(rep.w_origin) < 1.0);
    }
}
