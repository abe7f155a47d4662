#include "censadd/cli.hpp"
#include "censadd/io.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace censadd;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("censadd_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    os << text;
}

std::string read_file(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

/// The pipeline the CLI runs when no tuning flags are given.
PipelineConfig cli_default_pipeline(Index d) {
    PipelineConfig c = default_simulation().pipeline;
    c.psi = PsiSpec{};
    c.bv_mode = BvMode::plugin;
    c.region.domain = Box::cube(d, 0.15, 0.85);
    c.region.g = Box::cube(d, 0.25, 0.75);
    c.kernels.k_prime = c.kernels.k * static_cast<int>(d) + 2;
    return c;
}

}  // namespace

TEST_CASE("help and version") {
    const Run v = cli({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out.find(library_version()) != std::string::npos);
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({}).code == 1);
    CHECK(cli({"bogus"}).code == 1);
}

TEST_CASE("a sample without a delta column exits with code 1") {
    const fs::path dir = scratch("missing_delta");
    write_file(dir / "s.csv", "x1,x2,z\n0.1,0.2,3\n");
    const Run r = cli({"test", (dir / "s.csv").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("delta") != std::string::npos);
    CHECK(r.out.empty());
}

TEST_CASE("invalid tuning is rejected before any computation") {
    const fs::path dir = scratch("invalid");
    write_file(dir / "s.csv", "x1,x2,z,delta\n0.1,0.2,3,1\n");
    CHECK(cli({"test", (dir / "s.csv").string(), "--kernel", "gaussian"}).code == 1);
    CHECK(cli({"test", (dir / "s.csv").string(), "--gamma", "0.9"}).code == 1);
    CHECK(cli({"test", (dir / "s.csv").string(), "--g", "0.1,0.9"}).code == 1);
    CHECK(cli({"test", (dir / "s.csv").string(), "--bandwidths", "1,2"}).code == 1);
    CHECK(cli({"test", (dir / "s.csv").string(), "--kprime", "5"}).code == 1);
    CHECK(cli({"test", (dir / "s.csv").string(), "--oracle-bv"}).code == 1);
    CHECK(cli({"test", (dir / "nope.csv").string()}).code == 1);
}

TEST_CASE("a sample whose responses vanish gives T = 0 and z = -B ell^{-d/2} / sqrt(V)") {
    const fs::path dir = scratch("zero");
    SimulationConfig sc = default_simulation();
    CensoredSample s = draw_sample(sc.model, 300, 17);
    s.z.setConstant(3.0);
    s.delta.setOnes();
    std::ostringstream csv;
    write_sample_csv(csv, s);
    write_file(dir / "s.csv", csv.str());
    write_file(dir / "model.json", "{}");
    const Run r = cli({"test", (dir / "s.csv").string(), "--psi-center", "3", "--oracle-bv", "--model",
                       (dir / "model.json").string()});
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(j.at("t_n_star").get<double>() == 0.0);
    const double B = j.at("B_hat"), V = j.at("V_hat"), ell = j.at("ell_n");
    CHECK(B > 0.0);
    CHECK(j.at("z").get<double>() == doctest::Approx(-B / ell / std::sqrt(V)).epsilon(1e-12));
    CHECK(j.at("provenance").at("config").at("bv_mode") == "oracle");
}

TEST_CASE("draw then test reproduces the in-process report") {
    const fs::path dir = scratch("draw_test");
    const fs::path sample = dir / "s.csv";
    REQUIRE(cli({"draw", "-", "--seed", "5", "--replicate", "2", "-o", sample.string()}).code == 0);
    const Run r = cli({"test", sample.string()});
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);

    const SimulationConfig sc = default_simulation();
    const CensoredSample s = draw_sample(sc.model, sc.n, replicate_seed(5, 2));
    const PipelineResult direct = run_pipeline(s, cli_default_pipeline(2));
    CHECK(j.at("t_n_star").get<double>() == direct.report.t_n_star);
    CHECK(j.at("z").get<double>() == direct.report.z);
    CHECK(j.at("p_value").get<double>() == direct.report.p_value);
    CHECK(j.at("provenance").at("bandwidths").at("ell") == direct.bandwidths.ell);

    const Run to_stdout = cli({"draw", "-", "--seed", "5", "--replicate", "2"});
    CHECK(to_stdout.out == read_file(sample));
}

TEST_CASE("fit exports one curve per axis and reruns byte for byte") {
    const fs::path dir = scratch("fit");
    write_file(dir / "sim.json", R"({"model": {"d": 1, "components": ["sine"]}, "n": 300})");
    REQUIRE(cli({"draw", (dir / "sim.json").string(), "-o", (dir / "s.csv").string()}).code == 0);
    const fs::path out = dir / "out";
    REQUIRE(cli({"fit", (dir / "s.csv").string(), "--out-dir", out.string()}).code == 0);
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(out)) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    CHECK(names == std::vector<std::string>{"component_1.csv", "fit.json"});
    const std::string curve = read_file(out / "component_1.csv");
    const std::string summary = read_file(out / "fit.json");
    CHECK(curve.rfind("x1,eta_hat_1\n", 0) == 0);
    CHECK(Json::parse(summary).at("components").size() == 1);

    REQUIRE(cli({"fit", (dir / "s.csv").string(), "--out-dir", out.string()}).code == 0);
    CHECK(read_file(out / "component_1.csv") == curve);
    CHECK(read_file(out / "fit.json") == summary);
}

TEST_CASE("simulate with one replicate: the summary equals its row") {
    const fs::path dir = scratch("simulate");
    write_file(dir / "sim.json", R"({"n": 150, "seed": 3})");
    const std::vector<std::string> args{"simulate", (dir / "sim.json").string(), "--out-dir", (dir / "out").string(),
                                        "--replications", "1", "--threads", "1"};
    REQUIRE(cli(args).code == 0);
    const std::string rows = read_file(dir / "out" / "replicates.csv");
    const std::string summary = read_file(dir / "out" / "summary.json");

    std::istringstream in(rows);
    std::string header, line, cell;
    std::getline(in, header);
    std::getline(in, line);
    std::vector<std::string> cells;
    std::stringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() >= 9);
    const Json j = Json::parse(summary);
    CHECK(j.at("replications") == 1);
    CHECK(j.at("failures") == 0);
    CHECK(j.at("mean_z").get<double>() == std::stod(cells[6]));
    CHECK(j.at("mean_t_n_star").get<double>() == std::stod(cells[3]));

    REQUIRE(cli(args).code == 0);
    CHECK(read_file(dir / "out" / "replicates.csv") == rows);
    CHECK(read_file(dir / "out" / "summary.json") == summary);
}

TEST_CASE("km exports the censoring survival") {
    const fs::path dir = scratch("km");
    write_file(dir / "s.csv", "x1,z,delta\n0.1,1,1\n0.2,2,0\n0.3,3,1\n0.4,4,0\n");
    const Run r = cli({"km", (dir / "s.csv").string()});
    CHECK(r.code == 0);
    CHECK(r.out == "time,value\n2,0.66666666666666663\n4,0\n");
}

TEST_CASE("exit code 2 when the censoring estimate degenerates") {
    const fs::path dir = scratch("degenerate");
    // Under the as-printed counting the smallest censored time gets the factor 0,
    // so every later uncensored point meets G_n = 0.
    std::ostringstream csv;
    csv << "x1,x2,z,delta\n0.5,0.5,0.5,0\n";
    for (int i = 1; i < 60; ++i) csv << (i % 7) / 7.0 + 0.05 << ',' << (i % 11) / 11.0 + 0.03 << ',' << 1 + i * 0.01 << ",1\n";
    write_file(dir / "s.csv", csv.str());
    const Run r = cli({"test", (dir / "s.csv").string(), "--km", "as_printed"});
    CHECK(r.code == 2);
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("exit code 3 on a numeric failure") {
    const fs::path dir = scratch("numeric");
    REQUIRE(cli({"draw", "-", "-o", (dir / "s.csv").string()}).code == 0);
    write_file(dir / "cfg.json", R"({"density_floor": 1e9})");
    const Run r = cli({"test", (dir / "s.csv").string(), "--config", (dir / "cfg.json").string()});
    CHECK(r.code == 3);
    CHECK(r.err.find("error") != std::string::npos);
}
