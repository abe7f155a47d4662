#include "censadd/cli.hpp"

#include "censadd/errors.hpp"
#include "censadd/io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace censadd {
namespace {

struct PipelineFlags {
    std::string config_path;
    std::string kernel;
    std::string test_kernel;
    std::optional<int> k;
    std::optional<int> k_prime;
    std::optional<double> c1, c2, c3, gamma, tau0;
    std::string psi;
    std::optional<double> psi_center, psi_scale;
    std::string region;
    std::string g;
    std::optional<int> grid;
    std::optional<int> curve_points;
    std::string km;
    std::string bandwidths;
    std::string outer;
};

void add_pipeline_flags(CLI::App& app, PipelineFlags& f) {
    app.add_option("--config", f.config_path, "Pipeline configuration JSON; flags override it")->check(CLI::ExistingFile);
    app.add_option("--kernel", f.kernel, "Base kernel family, e.g. epanechnikov or quartic:k=2");
    app.add_option("--test-kernel", f.test_kernel, "Base family of the test-statistic kernel L");
    app.add_option("--k", f.k, "Order of the regression kernels (even, >= 2)")->check(CLI::Range(2, 64));
    app.add_option("--kprime", f.k_prime, "Order of the density kernel (even, > k d)")->check(CLI::Range(2, 64));
    app.add_option("--c1", f.c1, "Density bandwidth constant")->check(CLI::PositiveNumber);
    app.add_option("--c2", f.c2, "Regression bandwidth constant")->check(CLI::PositiveNumber);
    app.add_option("--c3", f.c3, "Test bandwidth constant")->check(CLI::PositiveNumber);
    app.add_option("--gamma", f.gamma, "Exponent of the test bandwidth ell_n = c3 n^-gamma")->check(CLI::PositiveNumber);
    app.add_option("--tau0", f.tau0, "Truncation point of psi");
    app.add_option("--psi", f.psi, "identity | identity_truncated | indicator_below");
    app.add_option("--psi-center", f.psi_center, "Centre subtracted from y before psi");
    app.add_option("--psi-scale", f.psi_scale, "Multiplier applied to psi");
    app.add_option("--region", f.region, "Integration box C as 'lo,hi' (cube)");
    app.add_option("--g", f.g, "Weight box g as 'lo,hi' (cube), strictly inside C");
    app.add_option("--grid", f.grid, "Nodes per axis of the inner marginal-integration rule")->check(CLI::Range(2, 4096));
    app.add_option("--curve-points", f.curve_points, "Abscissae per component curve")->check(CLI::Range(3, 100000));
    app.add_option("--km", f.km, "at_risk | as_printed");
    app.add_option("--bandwidths", f.bandwidths, "Frozen bandwidths 'h_n,h1,h2,ell'");
    app.add_option("--outer", f.outer, "exact | grid");
}

std::vector<double> parse_list(const std::string& text, std::size_t expected, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw InputError(flag + ": '" + item + "' is not a number");
        }
    }
    if (out.size() != expected)
        throw InputError(flag + " expects " + std::to_string(expected) + " comma-separated numbers");
    return out;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError("'" + path + "' is not valid JSON: " + e.what());
    }
}

int default_k_prime(int k, Index d) { return k * static_cast<int>(d) + 2; }

/// CLI defaults: covariates assumed on the unit cube, the default simulation's tuning.
PipelineConfig build_pipeline(const PipelineFlags& f, Index d) {
    PipelineConfig c = default_simulation().pipeline;
    c.psi = PsiSpec{};
    c.bv_mode = BvMode::plugin;
    c.region.domain = Box::cube(d, 0.15, 0.85);
    c.region.g = Box::cube(d, 0.25, 0.75);
    c.kernels.k_prime = default_k_prime(c.kernels.k, d);
    if (!f.config_path.empty()) c = pipeline_config_from_json(read_json_file(f.config_path), c);

    if (!f.kernel.empty()) {
        const KernelSpec spec = parse_kernel_spec(f.kernel);
        c.kernels.family = spec.family;
        if (spec.order) c.kernels.k = *spec.order;
    }
    if (!f.test_kernel.empty()) c.kernels.test_family = parse_kernel_spec(f.test_kernel).family;
    if (f.k) c.kernels.k = *f.k;
    if (f.k_prime)
        c.kernels.k_prime = *f.k_prime;
    else if (f.k && f.config_path.empty())
        c.kernels.k_prime = default_k_prime(c.kernels.k, d);
    if (f.c1) c.constants.c1 = *f.c1;
    if (f.c2) c.constants.c2 = *f.c2;
    if (f.c3) c.constants.c3 = *f.c3;
    if (f.gamma) c.gamma = *f.gamma;
    if (!f.psi.empty()) c.psi.form = parse_psi_form(f.psi);
    if (f.tau0) {
        c.psi.tau0 = *f.tau0;
        if (f.psi.empty() && c.psi.form == PsiForm::identity) c.psi.form = PsiForm::identity_truncated;
    }
    if (f.psi_center) c.psi.center = *f.psi_center;
    if (f.psi_scale) c.psi.scale = *f.psi_scale;
    if (!f.region.empty()) {
        const auto v = parse_list(f.region, 2, "--region");
        c.region.domain = Box::cube(d, v[0], v[1]);
    }
    if (!f.g.empty()) {
        const auto v = parse_list(f.g, 2, "--g");
        c.region.g = Box::cube(d, v[0], v[1]);
    }
    if (f.grid) c.fit_grid.inner.nodes = *f.grid;
    if (f.curve_points) c.fit_grid.curve_points = *f.curve_points;
    if (!f.km.empty()) c.km = parse_km_counting(f.km);
    if (!f.outer.empty()) c.outer.method = parse_outer_integration(f.outer);
    if (!f.bandwidths.empty()) {
        const auto v = parse_list(f.bandwidths, 4, "--bandwidths");
        for (double h : v)
            if (!(h > 0.0)) throw InputError("--bandwidths must be positive");
        c.frozen_bandwidths = Bandwidths{v[0], v[1], v[2], v[3]};
    }

    // Validate everything that does not need the data before computing.
    c.psi.validate();
    if (c.region.domain.dim() != d || c.region.g.dim() != d)
        throw InputError("region dimension does not match the data (d = " + std::to_string(d) + ")");
    c.region.validate();
    make_kernel_set(d, c.kernels.k, c.kernels.k_prime, c.kernels.family, c.kernels.test_family);
    make_plan(d, c.kernels.k, c.kernels.k_prime, c.constants, c.gamma);
    return c;
}

Json arguments_json(const std::vector<std::string>& args) {
    Json a = Json::array();
    for (const auto& s : args) a.push_back(s);
    return a;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot write '" + path + "'");
    os << text;
}

void emit(const std::string& path, const Json& j, std::ostream& out) {
    std::ostringstream ss;
    write_json(ss, j);
    if (path.empty() || path == "-")
        out << ss.str();
    else
        write_text(path, ss.str());
}

std::filesystem::path prepare_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec) throw InputError("cannot create '" + dir + "': " + ec.message());
    return p;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Additivity test and marginal-integration fit for right-censored regression", "censadd"};
    app.require_subcommand(1);
    app.set_version_flag("--version", library_version());

    PipelineFlags pf;
    std::string input;
    std::string output;
    std::string out_dir;
    std::string model_path;
    bool oracle_bv = false;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<int> replications;
    std::optional<double> theta;

    auto* test = app.add_subcommand("test", "Compute the standardized additivity statistic for a CSV sample");
    test->add_option("csv", input, "Sample with header x1,...,xd,z,delta")->required();
    test->add_option("-o,--output", output, "Report path (default: stdout)");
    test->add_flag("--oracle-bv", oracle_bv, "Use population B and V from --model instead of plug-in estimates");
    test->add_option("--model", model_path, "Simulation config whose model supplies the oracle B and V")
        ->check(CLI::ExistingFile);
    add_pipeline_flags(*test, pf);

    auto* fit = app.add_subcommand("fit", "Fit the additive model and export component curves");
    fit->add_option("csv", input, "Sample with header x1,...,xd,z,delta")->required();
    fit->add_option("--out-dir", out_dir, "Directory for component_<l>.csv and fit.json")->required();
    add_pipeline_flags(*fit, pf);

    auto* sim = app.add_subcommand("simulate", "Monte Carlo study of the standardized statistic");
    sim->add_option("config", input, "Simulation config JSON (use '-' for the defaults)")->required();
    sim->add_option("--out-dir", out_dir, "Directory for replicates.csv and summary.json")->required();
    sim->add_option("--seed", seed, "Master seed (overrides the config)");
    sim->add_option("--threads", threads, "Worker cap (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);
    sim->add_option("--replications", replications, "Number of replicates")->check(CLI::PositiveNumber);
    sim->add_option("--theta", theta, "Interaction strength (overrides the config)");
    sim->add_flag("--oracle-bv", oracle_bv, "Use population B and V");

    auto* draw = app.add_subcommand("draw", "Write the sample of one simulation replicate as CSV");
    draw->add_option("config", input, "Simulation config JSON (use '-' for the defaults)")->required();
    draw->add_option("-o,--output", output, "CSV path (default: stdout)");
    draw->add_option("--seed", seed, "Master seed (overrides the config)");
    std::uint64_t replicate = 0;
    draw->add_option("--replicate", replicate, "Replicate index whose derived seed is used");

    auto* km = app.add_subcommand("km", "Export the Kaplan-Meier estimate of the censoring survival");
    km->add_option("csv", input, "Sample with header x1,...,xd,z,delta")->required();
    km->add_option("-o,--output", output, "CSV path (default: stdout)");
    std::string km_counting = "at_risk";
    km->add_option("--km", km_counting, "at_risk | as_printed");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << library_version() << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }

    try {
        const Json provenance_extra{{"arguments", arguments_json(args)}};
        auto load_simulation = [&] {
            SimulationConfig c = input == "-" ? default_simulation() : simulation_config_from_json(read_json_file(input));
            if (seed) c.seed = *seed;
            return c;
        };

        if (*test) {
            const CensoredSample sample = read_sample_csv(std::filesystem::path(input));
            PipelineConfig config = build_pipeline(pf, sample.d());
            if (oracle_bv) {
                if (model_path.empty()) throw InputError("--oracle-bv needs --model");
                const SimulationConfig sc = simulation_config_from_json(read_json_file(model_path));
                if (sc.model.d != sample.d()) throw InputError("--model dimension does not match the data");
                config.bv_mode = BvMode::oracle;
                config = attach_oracle(config, sc.model);
            }
            const PipelineResult result = run_pipeline(sample, config);
            for (const auto& d : result.diagnostics) err << "warning: " << d.clause << ": " << d.message << '\n';
            Json report = to_json(result.report);
            report["provenance"] = provenance(config, result, provenance_extra);
            emit(output, report, out);
        } else if (*fit) {
            const CensoredSample sample = read_sample_csv(std::filesystem::path(input));
            const PipelineConfig config = build_pipeline(pf, sample.d());
            const PipelineResult result = run_pipeline(sample, config);
            for (const auto& d : result.diagnostics) err << "warning: " << d.clause << ": " << d.message << '\n';
            const auto dir = prepare_dir(out_dir);
            Json files = Json::array();
            for (const auto& curve : result.fit.components) {
                const std::string name = "component_" + std::to_string(curve.axis + 1) + ".csv";
                std::ostringstream ss;
                curve.write_csv(ss);
                write_text((dir / name).string(), ss.str());
                files.push_back(name);
            }
            Json j{{"mu_hat", result.fit.mu_hat}, {"components", files}};
            j["provenance"] = provenance(config, result, provenance_extra);
            emit((dir / "fit.json").string(), j, out);
        } else if (*sim) {
            SimulationConfig config = load_simulation();
            if (threads) config.threads = *threads;
            if (replications) config.replications = *replications;
            if (theta) config.model.theta = *theta;
            if (oracle_bv) config.pipeline.bv_mode = BvMode::oracle;
            config.validate();
            const MonteCarloResult result = run_monte_carlo(config);
            const auto dir = prepare_dir(out_dir);
            std::ostringstream rows;
            write_rows_csv(rows, result.rows);
            write_text((dir / "replicates.csv").string(), rows.str());
            Json j = to_json(result.summary);
            Json config_json = to_json(config);
            // The worker count does not affect results; keep it out so outputs
            // compare equal across machines.
            config_json.erase("threads");
            j["provenance"] = Json{{"version", library_version()},
                                   {"arguments", arguments_json(args)},
                                   {"config", config_json},
                                   {"seed_derivation", "splitmix64(seed + (r + 1) * 0x9E3779B97F4A7C15)"}};
            emit((dir / "summary.json").string(), j, out);
        } else if (*draw) {
            const SimulationConfig config = load_simulation();
            const CensoredSample sample = draw_sample(config.model, config.n, replicate_seed(config.seed, replicate));
            std::ostringstream ss;
            write_sample_csv(ss, sample);
            if (output.empty() || output == "-")
                out << ss.str();
            else
                write_text(output, ss.str());
        } else if (*km) {
            const CensoredSample sample = read_sample_csv(std::filesystem::path(input));
            const StepSurvival g = kaplan_meier_censoring(sample, parse_km_counting(km_counting));
            std::ostringstream ss;
            g.write_csv(ss);
            if (output.empty() || output == "-")
                out << ss.str();
            else
                write_text(output, ss.str());
        }
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace censadd
