#include "censadd/errors.hpp"
#include "censadd/simulate.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace censadd;

namespace {

SimulationConfig small_study(int replications) {
    SimulationConfig c = default_simulation();
    c.n = 150;
    c.replications = replications;
    c.seed = 99;
    return c;
}

bool same_rows(const std::vector<ReplicateRow>& a, const std::vector<ReplicateRow>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].seed != b[i].seed || a[i].ok != b[i].ok || a[i].z != b[i].z || a[i].t_n_star != b[i].t_n_star ||
            a[i].sup_error != b[i].sup_error)
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("draws are a pure function of the seed") {
    const TrueModel m = default_model();
    const CensoredSample a = draw_sample(m, 50, 7);
    const CensoredSample b = draw_sample(m, 50, 7);
    const CensoredSample c = draw_sample(m, 50, 8);
    CHECK(a.x == b.x);
    CHECK(a.z == b.z);
    CHECK(a.delta == b.delta);
    CHECK(a.z != c.z);
    CHECK(replicate_seed(1, 0) == replicate_seed(1, 0));
    CHECK(replicate_seed(1, 0) != replicate_seed(1, 1));
    CHECK(replicate_seed(1, 0) != replicate_seed(2, 0));
}

TEST_CASE("drawn samples respect the model's support") {
    const TrueModel m = default_model(1.0);
    const CensoredSample s = draw_sample(m, 2000, 3);
    CHECK_NOTHROW(s.validate());
    CHECK(s.x.minCoeff() >= m.covariate_lo);
    CHECK(s.x.maxCoeff() <= m.covariate_hi);
    CHECK(s.z.minCoeff() >= 0.0);
    CHECK(s.z.maxCoeff() <= m.y_upper());
}

TEST_CASE("no censoring gives delta identically one") {
    TrueModel m = default_model();
    m.censoring_rate = 0.0;
    const CensoredSample s = draw_sample(m, 500, 11);
    CHECK(s.delta.minCoeff() == 1);
    CHECK(m.censoring_survival(5.0) == 1.0);
    CHECK(m.uncensored_probability() == doctest::Approx(1.0));
}

TEST_CASE("empirical censoring rate matches its quadrature value") {
    const TrueModel m = default_model();
    const double p = m.uncensored_probability();
    CHECK(1.0 - p == doctest::Approx(0.3).epsilon(1e-6));
    const Index n = 10000;
    const CensoredSample s = draw_sample(m, n, 12);
    const double observed = s.delta.cast<double>().mean();
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    CHECK(std::abs(observed - p) < 3.0 * se);
}

TEST_CASE("components are centred and the interactions integrate out") {
    const TrueModel m = default_model(1.0);
    for (Index l = 0; l < m.d; ++l) CHECK(std::abs(m.component_mean(l)) < 1e-6);
    // Regression at x equals the additive part plus theta times the interaction.
    Vector x(2);
    x << 0.2, 0.9;
    const double additive = m.mu + m.component(0, 0.2) + m.component(1, 0.9);
    CHECK(m.regression(x) == doctest::Approx(additive + m.interaction_term(x)));
    CHECK(m.interaction_term(x) == doctest::Approx(0.25 * std::sin(2 * M_PI * 0.2) * std::sin(2 * M_PI * 0.9)));
    CHECK(m.censoring_survival(-1.0) == 1.0);
    CHECK(m.censoring_survival(2.0) == doctest::Approx(std::exp(-2.0 * m.censoring_rate)));
}

TEST_CASE("the noise law is a centred truncated normal") {
    const TrueModel m = default_model();
    double mass = 0.0, mean = 0.0, var = 0.0;
    const int steps = 200000;
    const double a = -m.noise_truncation * m.noise_sd, b = -a, w = (b - a) / steps;
    for (int i = 0; i < steps; ++i) {
        const double e = a + (i + 0.5) * w;
        const double p = m.noise_density(e) * w;
        mass += p;
        mean += e * p;
        var += e * e * p;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(mean) < 1e-10);
    CHECK(m.noise_variance() == doctest::Approx(var).epsilon(1e-7));
    CHECK(m.noise_variance() < m.noise_sd * m.noise_sd);
}

TEST_CASE("calibration hits the requested censoring fraction") {
    TrueModel m = default_model();
    for (double frac : {0.1, 0.3, 0.5}) {
        m.censoring_rate = calibrate_censoring_rate(m, frac);
        CHECK(1.0 - m.uncensored_probability() == doctest::Approx(frac).epsilon(1e-8));
    }
}

TEST_CASE("an inconsistent model is rejected") {
    TrueModel m = default_model();
    m.mu = 0.0;
    CHECK_THROWS_AS(m.validate(), InputError);
    m = default_model();
    m.components.pop_back();
    CHECK_THROWS_AS(m.validate(), InputError);
    SimulationConfig c = default_simulation();
    c.replications = 0;
    CHECK_THROWS_AS(c.validate(), InputError);
}

TEST_CASE("a single replicate equals one direct pipeline run") {
    SimulationConfig c = small_study(1);
    const MonteCarloResult mc = run_monte_carlo(c);
    REQUIRE(mc.rows.size() == 1);
    const CensoredSample s = draw_sample(c.model, c.n, replicate_seed(c.seed, 0));
    const PipelineResult direct = run_pipeline(s, attach_oracle(c.pipeline, c.model));
    CHECK(mc.rows[0].ok);
    CHECK(mc.rows[0].z == direct.report.z);
    CHECK(mc.rows[0].t_n_star == direct.report.t_n_star);
    CHECK(mc.summary.mean_z == mc.rows[0].z);
    CHECK(mc.summary.var_z == 0.0);
}

TEST_CASE("results do not depend on the number of worker threads") {
    SimulationConfig c = small_study(6);
    c.threads = 1;
    const MonteCarloResult one = run_monte_carlo(c);
    c.threads = 3;
    const MonteCarloResult three = run_monte_carlo(c);
    CHECK(same_rows(one.rows, three.rows));
    for (std::size_t r = 0; r < one.rows.size(); ++r) CHECK(one.rows[r].replicate == static_cast<int>(r));

    const MonteCarloSummary s = summarize(one.rows);
    CHECK(s.mean_z == one.summary.mean_z);
    CHECK(s.var_z == one.summary.var_z);

    std::ostringstream a, b;
    write_rows_csv(a, one.rows);
    write_rows_csv(b, three.rows);
    CHECK(a.str() == b.str());
}

TEST_CASE("summary statistics recompute from the rows") {
    std::vector<ReplicateRow> rows(4);
    const double z[] = {-1.0, 0.0, 2.0, 3.0};
    const double p[] = {0.8, 0.5, 0.02, 0.001};
    for (int i = 0; i < 4; ++i) {
        rows[i].ok = true;
        rows[i].z = z[i];
        rows[i].p_value = p[i];
        rows[i].t_n_star = i;
        rows[i].sup_error = 0.1 * i;
    }
    rows.push_back(ReplicateRow{});
    rows.back().failure = "DensityFloorHit";
    const MonteCarloSummary s = summarize(rows);
    CHECK(s.replications == 5);
    CHECK(s.failures == 1);
    CHECK(s.mean_z == doctest::Approx(1.0));
    CHECK(s.var_z == doctest::Approx(10.0 / 3.0));
    CHECK(s.rejection_rate == doctest::Approx(0.5));
    CHECK(s.mean_t_n_star == doctest::Approx(1.5));
    CHECK(s.mean_sup_error == doctest::Approx(0.15));
}

TEST_CASE("Kolmogorov-Smirnov distance to the standard normal") {
    CHECK(ks_distance_normal({0.0}) == doctest::Approx(0.5));
    // Two points at the quartiles: the largest gap is 1/4 at either point.
    CHECK(ks_distance_normal({0.6744897501960817, -0.6744897501960817}) == doctest::Approx(0.25).epsilon(1e-9));
    std::vector<double> quantiles;
    for (int i = 1; i < 1000; ++i) {
        const double target = i / 1000.0;
        double lo = -10, hi = 10;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (0.5 * std::erfc(-mid / std::sqrt(2.0)) < target ? lo : hi) = mid;
        }
        quantiles.push_back(0.5 * (lo + hi));
    }
    CHECK(ks_distance_normal(quantiles) <= 1.0 / 999.0 + 1e-9);
}

TEST_CASE("replicate failures are recorded and aggregated") {
    SimulationConfig c = small_study(3);
    c.pipeline.density_floor = 1e6;
    CHECK_THROWS_AS(run_monte_carlo(c), Error);
    c.max_failure_fraction = 1.0;
    const MonteCarloResult mc = run_monte_carlo(c);
    CHECK(mc.summary.failures == 3);
    for (const auto& row : mc.rows) {
        CHECK_FALSE(row.ok);
        CHECK_FALSE(row.failure.empty());
    }
}

TEST_CASE("rejection rate is non-decreasing in theta at paired seeds") {
    std::vector<double> rates;
    for (double theta : {0.0, 0.5, 1.0, 2.0}) {
        SimulationConfig c = default_simulation(theta);
        c.replications = 50;
        c.seed = 2024;
        rates.push_back(run_monte_carlo(c).summary.rejection_rate);
    }
    int inversions = 0;
    for (std::size_t i = 1; i < rates.size(); ++i) {
        if (rates[i] < rates[i - 1]) {
            ++inversions;
            CHECK(rates[i - 1] - rates[i] <= 0.02 + 1e-12);
        }
    }
    CHECK(inversions <= 1);
    CHECK(rates.back() > rates.front());
    MESSAGE("rejection rates " << rates[0] << " " << rates[1] << " " << rates[2] << " " << rates[3]);
}
