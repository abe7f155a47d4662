#include "censadd/io.hpp"

#include "censadd/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace censadd {
namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& text, std::size_t line, const std::string& column) {
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    if (!text.empty() && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (text.empty() || ec != std::errc() || ptr != end)
        throw InputError("line " + std::to_string(line) + ": column '" + column + "' is not a number: '" + text + "'");
    return v;
}

Json vector_json(const Vector& v) {
    Json a = Json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Vector vector_from_json(const Json& j) {
    Vector v(static_cast<Index>(j.size()));
    for (Index i = 0; i < v.size(); ++i) v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
    return v;
}

void reject_unknown(const Json& j, std::initializer_list<const char*> keys, const std::string& where) {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw InputError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
void read_if(const Json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

Json grid_json(const GridSpec& g) {
    return Json{{"rule", to_string(g.rule)}, {"nodes", g.nodes}, {"check_refinement", g.check_refinement}};
}

GridSpec grid_from_json(const Json& j, GridSpec g) {
    reject_unknown(j, {"rule", "nodes", "check_refinement"}, "grid");
    if (j.contains("rule")) g.rule = parse_rule_kind(j.at("rule").get<std::string>());
    read_if(j, "nodes", g.nodes);
    read_if(j, "check_refinement", g.check_refinement);
    if (g.nodes < 1) throw InputError("grid nodes must be positive");
    return g;
}

Json band_json(const ExponentBand& b) { return Json::array({b.lower, b.upper}); }

}  // namespace

std::string library_version() { return "censadd 1.0.0"; }

CensoredSample read_sample_csv(std::istream& is) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) throw InputError("empty CSV: no header row");
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    const auto header = split(line);
    std::map<std::string, std::size_t> column;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (!column.emplace(header[c], c).second)
            throw InputError("line " + std::to_string(line_no) + ": duplicate column '" + header[c] + "'");
    }
    for (const char* required : {"z", "delta"})
        if (!column.count(required)) throw InputError(std::string("header is missing the '") + required + "' column");
    Index d = 0;
    while (column.count("x" + std::to_string(d + 1))) ++d;
    if (d == 0) throw InputError("header is missing the 'x1' column");
    if (static_cast<std::size_t>(d) + 2 != header.size()) {
        for (const auto& name : header)
            if (name != "z" && name != "delta" && (name.size() < 2 || name[0] != 'x'))
                throw InputError("unexpected column '" + name + "'");
        throw InputError("covariate columns must be x1..xd without gaps");
    }
    std::vector<std::size_t> xcol(static_cast<std::size_t>(d));
    for (Index l = 0; l < d; ++l) xcol[static_cast<std::size_t>(l)] = column.at("x" + std::to_string(l + 1));
    const std::size_t zcol = column.at("z");
    const std::size_t dcol = column.at("delta");

    std::vector<double> xs;
    std::vector<double> zs;
    std::vector<int> deltas;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split(line);
        if (fields.size() != header.size())
            throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                             " fields, found " + std::to_string(fields.size()));
        for (Index l = 0; l < d; ++l)
            xs.push_back(parse_number(fields[xcol[static_cast<std::size_t>(l)]], line_no, "x" + std::to_string(l + 1)));
        const double z = parse_number(fields[zcol], line_no, "z");
        if (!std::isfinite(z) || z < 0.0)
            throw InputError("line " + std::to_string(line_no) + ": z must be finite and nonnegative");
        zs.push_back(z);
        const std::string& ds = fields[dcol];
        if (ds != "0" && ds != "1")
            throw InputError("line " + std::to_string(line_no) + ": delta must be 0 or 1, found '" + ds + "'");
        deltas.push_back(ds == "1" ? 1 : 0);
    }
    if (zs.empty()) throw InputError("CSV has a header but no data rows");
    CensoredSample s;
    const Index n = static_cast<Index>(zs.size());
    s.x.resize(n, d);
    s.z.resize(n);
    s.delta.resize(n);
    for (Index i = 0; i < n; ++i) {
        for (Index l = 0; l < d; ++l) s.x(i, l) = xs[static_cast<std::size_t>(i * d + l)];
        s.z[i] = zs[static_cast<std::size_t>(i)];
        s.delta[i] = deltas[static_cast<std::size_t>(i)];
    }
    s.validate();
    return s;
}

CensoredSample read_sample_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    return read_sample_csv(in);
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_sample_csv(std::ostream& os, const CensoredSample& sample) {
    for (Index l = 0; l < sample.d(); ++l) os << 'x' << l + 1 << ',';
    os << "z,delta\n";
    for (Index i = 0; i < sample.n(); ++i) {
        for (Index l = 0; l < sample.d(); ++l) os << format_double(sample.x(i, l)) << ',';
        os << format_double(sample.z[i]) << ',' << sample.delta[i] << '\n';
    }
}

Json to_json(const Box& box) { return Json{{"lo", vector_json(box.lo)}, {"hi", vector_json(box.hi)}}; }

Box box_from_json(const Json& j) {
    reject_unknown(j, {"lo", "hi"}, "box");
    return Box(vector_from_json(j.at("lo")), vector_from_json(j.at("hi")));
}

Json to_json(const PipelineConfig& c) {
    Json psi{{"form", to_string(c.psi.form)}, {"scale", c.psi.scale}, {"center", c.psi.center}};
    psi["tau0"] = c.psi.tau0 ? Json(*c.psi.tau0) : Json(nullptr);
    psi["bound"] = c.psi.bound ? Json(*c.psi.bound) : Json(nullptr);
    Json j;
    j["psi"] = psi;
    j["kernel"] = to_string(c.kernels.family);
    j["test_kernel"] = to_string(c.kernels.test_family.value_or(c.kernels.family));
    j["k"] = c.kernels.k;
    j["k_prime"] = c.kernels.k_prime;
    j["c1"] = c.constants.c1;
    j["c2"] = c.constants.c2;
    j["c3"] = c.constants.c3;
    j["c2_second"] = c.constants.c2_second ? Json(*c.constants.c2_second) : Json(nullptr);
    j["gamma"] = c.gamma ? Json(*c.gamma) : Json(nullptr);
    if (c.frozen_bandwidths) {
        const auto& b = *c.frozen_bandwidths;
        j["bandwidths"] = Json{{"h_n", b.h_n}, {"h1", b.h1}, {"h2", b.h2}, {"ell", b.ell}};
    } else {
        j["bandwidths"] = nullptr;
    }
    j["region"] = Json{{"domain", to_json(c.region.domain)}, {"g", to_json(c.region.g)}, {"alpha", c.region.alpha}};
    j["q"] = Json{{"shape", to_string(c.q_shape)}, {"power", c.q_power}};
    j["fit_grid"] = Json{{"curve_points", c.fit_grid.curve_points},
                         {"inner", grid_json(c.fit_grid.inner)},
                         {"mc_above_dim", c.fit_grid.mc_above_dim},
                         {"mc_points", c.fit_grid.mc_points},
                         {"mc_seed", c.fit_grid.mc_seed},
                         {"refinement_tol", c.fit_grid.refinement_tol}};
    j["outer"] = Json{{"method", to_string(c.outer.method)}, {"grid", grid_json(c.outer.grid)}};
    j["bv_grid"] = grid_json(c.bv_grid);
    j["constants_grid"] = grid_json(c.constants_grid);
    j["km"] = to_string(c.km);
    j["density_floor"] = c.density_floor;
    j["bv_mode"] = to_string(c.bv_mode);
    return j;
}

PipelineConfig pipeline_config_from_json(const Json& j, PipelineConfig c) {
    reject_unknown(j,
                   {"psi", "kernel", "test_kernel", "k", "k_prime", "c1", "c2", "c3", "c2_second", "gamma",
                    "bandwidths", "region", "q", "fit_grid", "outer", "bv_grid", "constants_grid", "km",
                    "density_floor", "bv_mode"},
                   "pipeline");
    try {
        if (j.contains("psi")) {
            const Json& p = j.at("psi");
            reject_unknown(p, {"form", "tau0", "bound", "scale", "center"}, "psi");
            if (p.contains("form")) c.psi.form = parse_psi_form(p.at("form").get<std::string>());
            if (p.contains("tau0")) c.psi.tau0 = p.at("tau0").is_null() ? std::nullopt : std::optional(p.at("tau0").get<double>());
            if (p.contains("bound")) c.psi.bound = p.at("bound").is_null() ? std::nullopt : std::optional(p.at("bound").get<double>());
            read_if(p, "scale", c.psi.scale);
            read_if(p, "center", c.psi.center);
        }
        if (j.contains("kernel")) c.kernels.family = parse_kernel_family(j.at("kernel").get<std::string>());
        if (j.contains("test_kernel")) c.kernels.test_family = parse_kernel_family(j.at("test_kernel").get<std::string>());
        read_if(j, "k", c.kernels.k);
        read_if(j, "k_prime", c.kernels.k_prime);
        read_if(j, "c1", c.constants.c1);
        read_if(j, "c2", c.constants.c2);
        read_if(j, "c3", c.constants.c3);
        if (j.contains("c2_second"))
            c.constants.c2_second = j.at("c2_second").is_null() ? std::nullopt : std::optional(j.at("c2_second").get<double>());
        if (j.contains("gamma")) c.gamma = j.at("gamma").is_null() ? std::nullopt : std::optional(j.at("gamma").get<double>());
        if (j.contains("bandwidths")) {
            const Json& b = j.at("bandwidths");
            if (b.is_null()) {
                c.frozen_bandwidths.reset();
            } else {
                reject_unknown(b, {"h_n", "h1", "h2", "ell"}, "bandwidths");
                c.frozen_bandwidths = Bandwidths{b.at("h_n").get<double>(), b.at("h1").get<double>(),
                                                 b.at("h2").get<double>(), b.at("ell").get<double>()};
            }
        }
        if (j.contains("region")) {
            const Json& r = j.at("region");
            reject_unknown(r, {"domain", "g", "alpha"}, "region");
            if (r.contains("domain")) c.region.domain = box_from_json(r.at("domain"));
            if (r.contains("g")) c.region.g = box_from_json(r.at("g"));
            read_if(r, "alpha", c.region.alpha);
        }
        if (j.contains("q")) {
            const Json& q = j.at("q");
            reject_unknown(q, {"shape", "power"}, "q");
            if (q.contains("shape")) c.q_shape = parse_density_shape(q.at("shape").get<std::string>());
            read_if(q, "power", c.q_power);
        }
        if (j.contains("fit_grid")) {
            const Json& f = j.at("fit_grid");
            reject_unknown(f, {"curve_points", "inner", "mc_above_dim", "mc_points", "mc_seed", "refinement_tol"},
                           "fit_grid");
            read_if(f, "curve_points", c.fit_grid.curve_points);
            if (f.contains("inner")) c.fit_grid.inner = grid_from_json(f.at("inner"), c.fit_grid.inner);
            read_if(f, "mc_above_dim", c.fit_grid.mc_above_dim);
            read_if(f, "mc_points", c.fit_grid.mc_points);
            read_if(f, "mc_seed", c.fit_grid.mc_seed);
            read_if(f, "refinement_tol", c.fit_grid.refinement_tol);
        }
        if (j.contains("outer")) {
            const Json& o = j.at("outer");
            reject_unknown(o, {"method", "grid"}, "outer");
            if (o.contains("method")) c.outer.method = parse_outer_integration(o.at("method").get<std::string>());
            if (o.contains("grid")) c.outer.grid = grid_from_json(o.at("grid"), c.outer.grid);
        }
        if (j.contains("bv_grid")) c.bv_grid = grid_from_json(j.at("bv_grid"), c.bv_grid);
        if (j.contains("constants_grid")) c.constants_grid = grid_from_json(j.at("constants_grid"), c.constants_grid);
        if (j.contains("km")) c.km = parse_km_counting(j.at("km").get<std::string>());
        read_if(j, "density_floor", c.density_floor);
        if (j.contains("bv_mode")) c.bv_mode = parse_bv_mode(j.at("bv_mode").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("invalid pipeline configuration: ") + e.what());
    }
    return c;
}

Json to_json(const TrueModel& m) {
    Json comps = Json::array();
    for (auto kind : m.components) comps.push_back(to_string(kind));
    return Json{{"d", m.d},
                {"mu", m.mu},
                {"components", comps},
                {"interaction", to_string(m.interaction)},
                {"theta", m.theta},
                {"noise_sd", m.noise_sd},
                {"noise_truncation", m.noise_truncation},
                {"covariate_lo", m.covariate_lo},
                {"covariate_hi", m.covariate_hi},
                {"censoring_rate", m.censoring_rate}};
}

Json to_json(const SimulationConfig& c) {
    return Json{{"model", to_json(c.model)},
                {"n", c.n},
                {"replications", c.replications},
                {"seed", c.seed},
                {"threads", c.threads},
                {"sup_error_points", c.sup_error_points},
                {"max_failure_fraction", c.max_failure_fraction},
                {"pipeline", to_json(c.pipeline)}};
}

SimulationConfig simulation_config_from_json(const Json& j) {
    try {
        reject_unknown(j, {"model", "n", "replications", "seed", "threads", "sup_error_points", "max_failure_fraction",
                           "pipeline"},
                       "simulation config");
        SimulationConfig c = default_simulation();
        TrueModel& m = c.model;
        if (j.contains("model")) {
            const Json& mj = j.at("model");
            reject_unknown(mj, {"d", "mu", "components", "interaction", "theta", "noise_sd", "noise_truncation",
                                "covariate_lo", "covariate_hi", "censoring_rate", "censored_fraction"},
                           "model");
            read_if(mj, "d", m.d);
            read_if(mj, "mu", m.mu);
            if (mj.contains("components")) {
                m.components.clear();
                for (const auto& name : mj.at("components")) m.components.push_back(parse_component_kind(name.get<std::string>()));
            } else if (m.d != 2) {
                m.components.assign(static_cast<std::size_t>(m.d), ComponentKind::linear);
            }
            if (mj.contains("interaction")) m.interaction = parse_interaction_kind(mj.at("interaction").get<std::string>());
            read_if(mj, "theta", m.theta);
            read_if(mj, "noise_sd", m.noise_sd);
            read_if(mj, "noise_truncation", m.noise_truncation);
            read_if(mj, "covariate_lo", m.covariate_lo);
            read_if(mj, "covariate_hi", m.covariate_hi);
            if (mj.contains("censoring_rate") && mj.contains("censored_fraction"))
                throw InputError("give either censoring_rate or censored_fraction, not both");
            if (mj.contains("censoring_rate")) {
                m.censoring_rate = mj.at("censoring_rate").get<double>();
            } else {
                TrueModel null_model = m;
                null_model.theta = 0.0;
                null_model.censoring_rate = 0.0;
                m.censoring_rate = calibrate_censoring_rate(null_model, mj.value("censored_fraction", 0.30));
            }
            m.validate();
        }
        read_if(j, "n", c.n);
        read_if(j, "replications", c.replications);
        read_if(j, "seed", c.seed);
        read_if(j, "threads", c.threads);
        read_if(j, "sup_error_points", c.sup_error_points);
        read_if(j, "max_failure_fraction", c.max_failure_fraction);

        // Pipeline defaults follow the model: psi truncated at the top of Y's
        // support and centred at mu, boxes rescaled to the covariate range.
        const double w = m.covariate_hi - m.covariate_lo;
        c.pipeline.psi.tau0 = m.y_upper();
        c.pipeline.psi.center = m.mu;
        c.pipeline.region.domain = Box::cube(m.d, m.covariate_lo + 0.15 * w, m.covariate_hi - 0.15 * w);
        c.pipeline.region.g = Box::cube(m.d, m.covariate_lo + 0.25 * w, m.covariate_hi - 0.25 * w);
        if (j.contains("pipeline")) c.pipeline = pipeline_config_from_json(j.at("pipeline"), c.pipeline);
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("invalid simulation configuration: ") + e.what());
    }
}

Json provenance(const PipelineConfig& config, const PipelineResult& result, const Json& extra) {
    Json j;
    j["version"] = library_version();
    j["config"] = to_json(config);
    const auto& b = result.bandwidths;
    j["bandwidths"] = Json{{"h_n", b.h_n}, {"h1", b.h1}, {"h2", b.h2}, {"ell", b.ell}};
    const KernelSet& k = result.kernels;
    j["kernels"] = Json{{"L", k.L.factor(0).describe() + "^" + std::to_string(k.L.dim())},
                        {"K", k.K.factor(0).describe() + "^" + std::to_string(k.K.dim())},
                        {"K1", k.K1.describe()},
                        {"K3", k.K3.factor(0).describe() + "^" + std::to_string(k.K3.dim())}};
    j["kernel_constants"] = Json{{"l2_norm_sq", result.constants.l2_norm_sq},
                                 {"conv_sq_integral", result.constants.conv_sq_integral}};
    const BandwidthPlan plan = make_plan(k.d, k.k, k.k_prime, config.constants, config.gamma);
    const RateReport rates = plan.rates();
    j["plan"] = Json{{"gamma", plan.gamma()},
                     {"feasible_band", band_json(rates.band)},
                     {"printed_band", band_json(rates.printed)},
                     {"diverging_exponent", rates.diverging_exponent},
                     {"vanishing_exponent", rates.vanishing_exponent},
                     {"printed_vanishing_exponent", rates.printed_vanishing_exponent},
                     {"frozen", config.frozen_bandwidths.has_value()}};
    Json diags = Json::array();
    for (const auto& d : result.diagnostics) diags.push_back(Json{{"clause", d.clause}, {"message", d.message}});
    j["diagnostics"] = diags;
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    return j;
}

Json to_json(const TestReport& r) {
    return Json{{"t_n_star", r.t_n_star}, {"ell_n", r.ell_n}, {"n", r.n},     {"d", r.d},
                {"B_hat", r.B_hat},       {"V_hat", r.V_hat}, {"z", r.z}, {"p_value", r.p_value}};
}

Json to_json(const MonteCarloSummary& s) {
    return Json{{"replications", s.replications},   {"failures", s.failures},
                {"mean_z", s.mean_z},               {"var_z", s.var_z},
                {"rejection_rate", s.rejection_rate}, {"ks_distance", s.ks_distance},
                {"mean_t_n_star", s.mean_t_n_star}, {"mean_sup_error", s.mean_sup_error}};
}

void write_json(std::ostream& os, const Json& j) { os << j.dump(2) << '\n'; }

}  // namespace censadd
