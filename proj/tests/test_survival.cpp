#include "censadd/errors.hpp"
#include "censadd/simulate.hpp"
#include "censadd/survival.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

using namespace censadd;

namespace {

CensoredSample one_dim(std::vector<double> z, std::vector<int> delta) {
    CensoredSample s;
    const Index n = static_cast<Index>(z.size());
    s.x = Matrix::Zero(n, 1);
    s.z = Eigen::Map<Vector>(z.data(), n);
    s.delta = Eigen::Map<Eigen::VectorXi>(delta.data(), n);
    return s;
}

// Product-limit estimate of P(C > t) written out directly: walk the sorted
// times, multiply by (1 - 1/at_risk) at every censored time.
double product_limit(const CensoredSample& s, double t) {
    std::vector<Index> idx(static_cast<std::size_t>(s.n()));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::sort(idx.begin(), idx.end(), [&](Index a, Index b) { return s.z[a] < s.z[b]; });
    double g = 1.0;
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const Index i = idx[r];
        if (s.z[i] > t) break;
        if (s.delta[i] == 0) g *= 1.0 - 1.0 / static_cast<double>(idx.size() - r);
    }
    return g;
}

CensoredSample random_sample(std::mt19937_64& rng, Index n) {
    std::exponential_distribution<double> ey(1.0), ec(0.7);
    CensoredSample s;
    s.x = Matrix::Zero(n, 1);
    s.z.resize(n);
    s.delta.resize(n);
    for (Index i = 0; i < n; ++i) {
        const double y = ey(rng), c = ec(rng);
        s.z[i] = std::min(y, c);
        s.delta[i] = y <= c;
    }
    return s;
}

}  // namespace

TEST_CASE("no censoring gives G_n identically one") {
    const auto s = one_dim({0.5, 1.0, 2.0}, {1, 1, 1});
    for (auto counting : {KmCounting::at_risk, KmCounting::as_printed}) {
        const StepSurvival g = kaplan_meier_censoring(s, counting);
        for (double y : {0.0, 0.7, 5.0, 1e9}) CHECK(g(y) == 1.0);
    }
}

TEST_CASE("hand cases under the literal counting N(t) = #{Z_j <= t}") {
    const auto a = kaplan_meier_censoring(one_dim({1, 2, 3}, {1, 0, 1}), KmCounting::as_printed);
    CHECK(a(1.999) == 1.0);
    CHECK(a(2.0) == 0.5);
    CHECK(a(10.0) == 0.5);
    const auto b = kaplan_meier_censoring(one_dim({1, 2}, {0, 1}), KmCounting::as_printed);
    CHECK(b(0.999) == 1.0);
    CHECK(b(1.0) == 0.0);
    CHECK(b(3.0) == 0.0);
}

TEST_CASE("hand cases under at-risk counting") {
    const auto a = kaplan_meier_censoring(one_dim({1, 2, 3}, {1, 0, 1}));
    CHECK(a(1.999) == 1.0);
    CHECK(a(2.0) == 0.5);
    const auto b = kaplan_meier_censoring(one_dim({1, 2}, {0, 1}));
    CHECK(b(1.0) == 0.5);
    // The last observation censored exhausts the mass.
    const auto c = kaplan_meier_censoring(one_dim({1, 2}, {1, 0}));
    CHECK(c(2.0) == 0.0);
}

TEST_CASE("at-risk counting matches an independent product-limit oracle") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        const auto s = random_sample(rng, 60);
        const StepSurvival g = kaplan_meier_censoring(s);
        for (Index i = 0; i < s.n(); ++i) {
            CHECK(g(s.z[i]) == doctest::Approx(product_limit(s, s.z[i])).epsilon(1e-13));
            CHECK(g(s.z[i] * 0.999) == doctest::Approx(product_limit(s, s.z[i] * 0.999)).epsilon(1e-13));
        }
    }
}

TEST_CASE("G_n is non-increasing, in [0, 1] and invariant under row permutation") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 30; ++rep) {
        auto s = random_sample(rng, 40);
        if (rep % 3 == 0) s.z = (s.z * 4.0).array().round() / 4.0;  // force ties
        for (auto counting : {KmCounting::at_risk, KmCounting::as_printed}) {
            const StepSurvival g = kaplan_meier_censoring(s, counting);
            double last = 1.0;
            for (double y = 0.0; y < 6.0; y += 0.01) {
                const double v = g(y);
                CHECK(v <= last);
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
                last = v;
            }
            Eigen::VectorXi order(s.n());
            std::iota(order.data(), order.data() + s.n(), 0);
            std::shuffle(order.data(), order.data() + s.n(), rng);
            const StepSurvival gp = kaplan_meier_censoring(s.permuted(order), counting);
            CHECK(gp.jump_times == g.jump_times);
            CHECK(gp.values == g.values);
        }
    }
}

TEST_CASE("ipcw responses") {
    PsiSpec identity;
    const auto all = one_dim({1.0, 2.5, 4.0}, {1, 1, 1});
    const Vector r = ipcw_responses(all, kaplan_meier_censoring(all), identity);
    CHECK(r == all.z);

    PsiSpec truncated{PsiForm::identity_truncated, 2.5};
    const auto s = one_dim({1, 2, 3}, {1, 0, 1});
    for (auto counting : {KmCounting::at_risk, KmCounting::as_printed}) {
        const Vector rt = ipcw_responses(s, kaplan_meier_censoring(s, counting), truncated);
        CHECK(rt[0] == 1.0);
        CHECK(rt[1] == 0.0);
        CHECK(rt[2] == 0.0);
    }

    // An uncensored point with psi != 0 where G_n = 0 cannot be reweighted.
    const auto degenerate = one_dim({1, 2}, {0, 1});
    CHECK_THROWS_AS(ipcw_responses(degenerate, kaplan_meier_censoring(degenerate, KmCounting::as_printed), identity),
                    CensoringDegenerate);
}

TEST_CASE("sample validation") {
    auto s = one_dim({1, 2}, {1, 0});
    CHECK_NOTHROW(s.validate());
    s.delta[0] = 2;
    CHECK_THROWS_AS(s.validate(), InputError);
    s = one_dim({1, -2}, {1, 0});
    CHECK_THROWS_AS(s.validate(), InputError);
    s = one_dim({1, NAN}, {1, 0});
    CHECK_THROWS_AS(s.validate(), InputError);
}

TEST_CASE("step function CSV export") {
    const auto g = kaplan_meier_censoring(one_dim({1, 2, 3}, {1, 0, 1}));
    std::ostringstream os;
    g.write_csv(os);
    CHECK(os.str() == "time,value\n2,0.5\n");
}

TEST_CASE("sup |G_n - G| shrinks with n") {
    TrueModel m = default_model();
    double previous = 1.0;
    for (Index n : {100, 400, 1600}) {
        double total = 0.0;
        const int reps = 50;
        for (int r = 0; r < reps; ++r) {
            const CensoredSample s = draw_sample(m, n, replicate_seed(99, static_cast<std::uint64_t>(r)));
            const StepSurvival g = kaplan_meier_censoring(s);
            double worst = 0.0;
            for (double y = 0.0; y <= 4.0; y += 0.01) worst = std::max(worst, std::abs(g(y) - m.censoring_survival(y)));
            total += worst;
        }
        const double mean = total / reps;
        CAPTURE(n);
        CHECK(mean < previous);
        previous = mean;
    }
}
