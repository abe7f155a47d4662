#include "censadd/simulate.hpp"

#include "censadd/errors.hpp"
#include "censadd/quadrature.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

namespace censadd {
namespace {

constexpr int kNoiseNodes = 64;
constexpr int kCovariateNodes = 24;

double std_normal_pdf(double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); }

// Integrates f(e) against the truncated noise density, splitting at the given
// breakpoints so that jumps of f do not spoil the Gauss-Legendre accuracy.
template <class F>
double noise_expectation(const TrueModel& m, F&& f, std::vector<double> breaks = {}) {
    const double a = -m.noise_truncation * m.noise_sd;
    const double b = -a;
    std::vector<double> cuts{a};
    std::sort(breaks.begin(), breaks.end());
    for (double t : breaks)
        if (t > a && t < b) cuts.push_back(t);
    cuts.push_back(b);
    static const Rule1D reference = gauss_legendre(kNoiseNodes, -1.0, 1.0);
    double acc = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double half = 0.5 * (cuts[s + 1] - cuts[s]);
        const double mid = 0.5 * (cuts[s + 1] + cuts[s]);
        double part = 0.0;
        for (Index i = 0; i < reference.size(); ++i) {
            const double e = mid + half * reference.nodes[i];
            part += reference.weights[i] * f(e) * m.noise_density(e);
        }
        acc += half * part;
    }
    return acc;
}

std::vector<double> psi_breaks(const PsiSpec& psi, double mean) {
    if (psi.tau0 && psi.form != PsiForm::identity) return {*psi.tau0 - mean};
    return {};
}

double rescaled(const TrueModel& m, double x) { return (x - m.covariate_lo) / (m.covariate_hi - m.covariate_lo); }

double component_sup(ComponentKind kind) {
    switch (kind) {
        case ComponentKind::zero: return 0.0;
        case ComponentKind::linear: return 0.5;
        case ComponentKind::sine: return 0.5;
    }
    return 0.0;
}

double interaction_sup(InteractionKind kind) {
    switch (kind) {
        case InteractionKind::none: return 0.0;
        case InteractionKind::bilinear: return 0.25;
        case InteractionKind::sine_product: return 0.25;
    }
    return 0.0;
}

}  // namespace

std::string to_string(ComponentKind kind) {
    switch (kind) {
        case ComponentKind::zero: return "zero";
        case ComponentKind::linear: return "linear";
        case ComponentKind::sine: return "sine";
    }
    return "?";
}

ComponentKind parse_component_kind(const std::string& name) {
    if (name == "zero") return ComponentKind::zero;
    if (name == "linear") return ComponentKind::linear;
    if (name == "sine") return ComponentKind::sine;
    throw InputError("unknown component kind '" + name + "'");
}

std::string to_string(InteractionKind kind) {
    switch (kind) {
        case InteractionKind::none: return "none";
        case InteractionKind::bilinear: return "bilinear";
        case InteractionKind::sine_product: return "sine_product";
    }
    return "?";
}

InteractionKind parse_interaction_kind(const std::string& name) {
    if (name == "none") return InteractionKind::none;
    if (name == "bilinear") return InteractionKind::bilinear;
    if (name == "sine_product") return InteractionKind::sine_product;
    throw InputError("unknown interaction kind '" + name + "'");
}

void TrueModel::validate() const {
    if (d < 1) throw InputError("model dimension must be at least 1");
    if (static_cast<Index>(components.size()) != d) throw InputError("model needs one component per axis");
    if (interaction != InteractionKind::none && theta != 0.0 && d < 2)
        throw InputError("interaction needs at least two axes");
    if (!(noise_sd > 0.0) || !(noise_truncation > 0.0)) throw InputError("noise sd and truncation must be positive");
    if (!(covariate_hi > covariate_lo)) throw InputError("covariate box is empty");
    if (!(censoring_rate >= 0.0) || !std::isfinite(censoring_rate)) throw InputError("censoring rate must be >= 0");
    if (!std::isfinite(mu) || !std::isfinite(theta)) throw InputError("mu and theta must be finite");
    if (y_lower() < 0.0) throw InputError("model allows negative responses; raise mu");
}

double TrueModel::component(Index l, double x) const {
    const double u = rescaled(*this, x);
    switch (components.at(static_cast<std::size_t>(l))) {
        case ComponentKind::zero: return 0.0;
        case ComponentKind::linear: return u - 0.5;
        case ComponentKind::sine: return 0.5 * std::sin(2.0 * std::numbers::pi * u);
    }
    return 0.0;
}

double TrueModel::interaction_term(const Eigen::Ref<const Vector>& x) const {
    if (interaction == InteractionKind::none || d < 2) return 0.0;
    const double u1 = rescaled(*this, x[0]);
    const double u2 = rescaled(*this, x[1]);
    if (interaction == InteractionKind::bilinear) return (u1 - 0.5) * (u2 - 0.5);
    return 0.25 * std::sin(2.0 * std::numbers::pi * u1) * std::sin(2.0 * std::numbers::pi * u2);
}

double TrueModel::regression(const Eigen::Ref<const Vector>& x) const {
    double acc = mu;
    for (Index l = 0; l < d; ++l) acc += component(l, x[l]);
    return acc + theta * interaction_term(x);
}

double TrueModel::density(const Eigen::Ref<const Vector>& x) const {
    for (Index l = 0; l < d; ++l)
        if (x[l] < covariate_lo || x[l] > covariate_hi) return 0.0;
    return std::pow(covariate_hi - covariate_lo, -static_cast<double>(d));
}

double TrueModel::censoring_survival(double t) const {
    if (censoring_rate == 0.0 || t < 0.0) return 1.0;
    return std::exp(-censoring_rate * t);
}

double TrueModel::noise_density(double e) const {
    const double c = noise_truncation;
    if (std::abs(e) > c * noise_sd) return 0.0;
    return std_normal_pdf(e / noise_sd) / (noise_sd * std::erf(c / std::sqrt(2.0)));
}

double TrueModel::noise_variance() const {
    const double c = noise_truncation;
    const double mass = std::erf(c / std::sqrt(2.0));
    return noise_sd * noise_sd * (1.0 - 2.0 * c * std_normal_pdf(c) / mass);
}

double TrueModel::y_lower() const {
    double acc = mu;
    for (auto kind : components) acc -= component_sup(kind);
    return acc - std::abs(theta) * interaction_sup(interaction) - noise_truncation * noise_sd;
}

double TrueModel::y_upper() const {
    double acc = mu;
    for (auto kind : components) acc += component_sup(kind);
    return acc + std::abs(theta) * interaction_sup(interaction) + noise_truncation * noise_sd;
}

double TrueModel::psi_regression(const Eigen::Ref<const Vector>& x, const PsiSpec& psi) const {
    const double m = regression(x);
    return noise_expectation(*this, [&](double e) { return psi(m + e); }, psi_breaks(psi, m));
}

double TrueModel::sigma0_sq(const Eigen::Ref<const Vector>& x, const PsiSpec& psi) const {
    const double m = regression(x);
    const auto breaks = psi_breaks(psi, m);
    const double second = noise_expectation(
        *this,
        [&](double e) {
            const double v = psi(m + e);
            return v == 0.0 ? 0.0 : v * v / censoring_survival(m + e);
        },
        breaks);
    const double first = noise_expectation(*this, [&](double e) { return psi(m + e); }, breaks);
    return second - first * first;
}

double TrueModel::uncensored_probability() const {
    const TensorGrid grid = tensor_grid(GridSpec{RuleKind::gauss_legendre, kCovariateNodes, false}, covariate_box());
    double acc = 0.0;
    for (Index g = 0; g < grid.size(); ++g) {
        const double m = regression(grid.points.row(g).transpose());
        acc += grid.weights[g] * density(grid.points.row(g).transpose()) *
               noise_expectation(*this, [&](double e) { return censoring_survival(m + e); });
    }
    return acc;
}

double TrueModel::observed_survival(double t) const {
    const TensorGrid grid = tensor_grid(GridSpec{RuleKind::gauss_legendre, kCovariateNodes, false}, covariate_box());
    const double c = noise_truncation;
    const double mass = std::erf(c / std::sqrt(2.0));
    double above = 0.0;
    for (Index g = 0; g < grid.size(); ++g) {
        const double m = regression(grid.points.row(g).transpose());
        const double s = std::clamp((t - m) / noise_sd, -c, c);
        // P(e > t - m) for the truncated normal.
        const double tail = 0.5 * (std::erf(c / std::sqrt(2.0)) - std::erf(s / std::sqrt(2.0))) / mass;
        above += grid.weights[g] * density(grid.points.row(g).transpose()) * tail;
    }
    return censoring_survival(t) * above;
}

double TrueModel::observed_quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw InputError("quantile level must lie in (0, 1)");
    double lo = 0.0;
    double hi = y_upper();
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (1.0 - observed_survival(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double TrueModel::component_mean(Index l) const {
    const Rule1D rule = gauss_legendre(kNoiseNodes, covariate_lo, covariate_hi);
    return rule.integrate([&](double x) { return component(l, x); }) / (covariate_hi - covariate_lo);
}

double calibrate_censoring_rate(TrueModel model, double censored_fraction) {
    if (!(censored_fraction >= 0.0 && censored_fraction < 1.0))
        throw InputError("censored fraction must lie in [0, 1)");
    if (censored_fraction == 0.0) return 0.0;
    auto censored = [&](double rate) {
        model.censoring_rate = rate;
        return 1.0 - model.uncensored_probability();
    };
    double lo = 0.0;
    double hi = 1.0;
    while (censored(hi) < censored_fraction) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) throw InputError("censoring fraction not reachable");
    }
    for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (censored(mid) < censored_fraction)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

TrueModel default_model(double theta, InteractionKind interaction) {
    TrueModel model;
    model.theta = theta;
    model.interaction = interaction;
    TrueModel null_model = model;
    null_model.theta = 0.0;
    // The rate is calibrated under the null so paired alternatives share it.
    model.censoring_rate = calibrate_censoring_rate(null_model, 0.30);
    return model;
}

CensoredSample draw_sample(const TrueModel& model, Index n, std::uint64_t seed) {
    model.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(model.covariate_lo, model.covariate_hi);
    std::normal_distribution<double> normal(0.0, model.noise_sd);
    std::exponential_distribution<double> expo(model.censoring_rate > 0.0 ? model.censoring_rate : 1.0);
    const double cap = model.noise_truncation * model.noise_sd;

    CensoredSample s;
    s.x.resize(n, model.d);
    s.z.resize(n);
    s.delta.resize(n);
    for (Index i = 0; i < n; ++i) {
        for (Index l = 0; l < model.d; ++l) s.x(i, l) = unif(rng);
        double e = normal(rng);
        while (std::abs(e) > cap) e = normal(rng);
        const double y = model.regression(s.x.row(i).transpose()) + e;
        const double c = model.censoring_rate > 0.0 ? expo(rng) : std::numeric_limits<double>::infinity();
        s.z[i] = std::min(y, c);
        s.delta[i] = y <= c ? 1 : 0;
    }
    return s;
}

std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t r) {
    // splitmix64 finaliser applied to a counter offset from the master seed.
    std::uint64_t z = master + (r + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void SimulationConfig::validate() const {
    model.validate();
    if (replications < 1) throw InputError("replications must be at least 1");
    if (n < 2) throw InputError("sample size must be at least 2");
    if (threads < 0) throw InputError("threads must be >= 0");
    if (sup_error_points < 2) throw InputError("sup_error_points must be at least 2");
    if (pipeline.region.domain.dim() != model.d) throw InputError("region dimension does not match the model");
    pipeline.psi.validate();
    pipeline.region.validate();
}

PipelineConfig attach_oracle(PipelineConfig pipeline, const TrueModel& model) {
    const PsiSpec psi = pipeline.psi;
    pipeline.oracle_sigma0_sq = [model, psi](const Eigen::Ref<const Vector>& x) { return model.sigma0_sq(x, psi); };
    pipeline.oracle_density = [model](const Eigen::Ref<const Vector>& x) { return model.density(x); };
    return pipeline;
}

SimulationConfig default_simulation(double theta) {
    SimulationConfig config;
    config.model = default_model(theta);
    PipelineConfig& p = config.pipeline;
    p.psi.form = PsiForm::identity_truncated;
    p.psi.tau0 = config.model.y_upper();
    p.psi.center = config.model.mu;
    p.kernels.family = KernelFamily::epanechnikov;
    p.kernels.test_family = KernelFamily::epanechnikov;
    p.kernels.k = 2;
    p.kernels.k_prime = 6;
    p.constants = PlanConstants{0.6, 0.5, 0.8, std::nullopt};
    p.region = EvaluationRegion{Box::cube(2, 0.15, 0.85), 0.05, Box::cube(2, 0.25, 0.75)};
    p.bv_mode = BvMode::oracle;
    return config;
}

namespace {

double sup_error(const SimulationConfig& config, const AdditiveFit& fit) {
    const Box& g = config.pipeline.region.g;
    const Index d = g.dim();
    const int m = config.sup_error_points;
    std::vector<Rule1D> axes;
    for (Index k = 0; k < d; ++k) axes.push_back(trapezoid_rule(m, g.lo[k], g.hi[k]));
    const TensorGrid grid = tensor_grid(axes);
    double worst = 0.0;
    for (Index i = 0; i < grid.size(); ++i) {
        const Vector x = grid.points.row(i).transpose();
        worst = std::max(worst, std::abs(fit(x) - config.model.psi_regression(x, config.pipeline.psi)));
    }
    return worst;
}

}  // namespace

ReplicateRow run_replicate(const SimulationConfig& config, int replicate) {
    ReplicateRow row;
    row.replicate = replicate;
    row.seed = replicate_seed(config.seed, static_cast<std::uint64_t>(replicate));
    const CensoredSample sample = draw_sample(config.model, config.n, row.seed);
    try {
        const PipelineResult result = run_pipeline(sample, config.pipeline);
        row.ok = true;
        row.t_n_star = result.report.t_n_star;
        row.B_hat = result.report.B_hat;
        row.V_hat = result.report.V_hat;
        row.z = result.report.z;
        row.p_value = result.report.p_value;
        row.sup_error = sup_error(config, result.fit);
    } catch (const Error& e) {
        row.ok = false;
        row.failure = e.what();
    }
    return row;
}

MonteCarloSummary summarize(const std::vector<ReplicateRow>& rows, double level) {
    MonteCarloSummary s;
    s.replications = static_cast<int>(rows.size());
    std::vector<double> zs;
    double rejected = 0.0;
    double t_sum = 0.0;
    double err_sum = 0.0;
    for (const auto& row : rows) {
        if (!row.ok) {
            ++s.failures;
            continue;
        }
        zs.push_back(row.z);
        rejected += row.p_value < level ? 1.0 : 0.0;
        t_sum += row.t_n_star;
        err_sum += row.sup_error;
    }
    const double m = static_cast<double>(zs.size());
    if (zs.empty()) return s;
    for (double z : zs) s.mean_z += z;
    s.mean_z /= m;
    for (double z : zs) s.var_z += (z - s.mean_z) * (z - s.mean_z);
    s.var_z = zs.size() > 1 ? s.var_z / (m - 1.0) : 0.0;
    s.rejection_rate = rejected / m;
    s.mean_t_n_star = t_sum / m;
    s.mean_sup_error = err_sum / m;
    s.ks_distance = ks_distance_normal(zs);
    return s;
}

double ks_distance_normal(std::vector<double> sample) {
    if (sample.empty()) return 0.0;
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double cdf = normal_cdf(sample[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
    }
    return d;
}

MonteCarloResult run_monte_carlo(const SimulationConfig& config_in) {
    config_in.validate();
    SimulationConfig config = config_in;
    if (config.pipeline.bv_mode == BvMode::oracle && !config.pipeline.oracle_sigma0_sq)
        config.pipeline = attach_oracle(config.pipeline, config.model);

    const int m = config.replications;
    MonteCarloResult result;
    result.rows.resize(static_cast<std::size_t>(m));
    unsigned workers = config.threads > 0 ? static_cast<unsigned>(config.threads) : std::thread::hardware_concurrency();
    workers = std::clamp(workers, 1u, static_cast<unsigned>(m));

    std::atomic<int> next{0};
    std::exception_ptr fatal;
    std::mutex fatal_mutex;
    auto work = [&] {
        for (int r = next++; r < m; r = next++) {
            try {
                result.rows[static_cast<std::size_t>(r)] = run_replicate(config, r);
            } catch (...) {
                std::lock_guard lock(fatal_mutex);
                if (!fatal) fatal = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (fatal) std::rethrow_exception(fatal);

    result.summary = summarize(result.rows);
    if (result.summary.failures > config.max_failure_fraction * m) {
        std::string first;
        for (const auto& row : result.rows)
            if (!row.ok) {
                first = row.failure;
                break;
            }
        throw Error(std::to_string(result.summary.failures) + " of " + std::to_string(m) +
                    " replicates failed; first failure: " + first);
    }
    return result;
}

void write_rows_csv(std::ostream& os, const std::vector<ReplicateRow>& rows) {
    const auto flags = os.flags();
    const auto precision = os.precision();
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << "replicate,seed,ok,t_n_star,B_hat,V_hat,z,p_value,sup_error,failure\n";
    for (const auto& r : rows) {
        os << r.replicate << ',' << r.seed << ',' << (r.ok ? 1 : 0) << ',' << r.t_n_star << ',' << r.B_hat << ','
           << r.V_hat << ',' << r.z << ',' << r.p_value << ',' << r.sup_error << ',';
        std::string msg = r.failure;
        std::replace(msg.begin(), msg.end(), '"', '\'');
        if (!msg.empty()) os << '"' << msg << '"';
        os << '\n';
    }
    os.flags(flags);
    os.precision(precision);
}

}  // namespace censadd
