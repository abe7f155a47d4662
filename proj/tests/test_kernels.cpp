#include "censadd/errors.hpp"
#include "censadd/kernels.hpp"
#include "censadd/quadrature.hpp"

#include <doctest.h>

#include <cmath>

using namespace censadd;

namespace {

// Moments by Gauss-Legendre on the support, independent of the stored coefficients' layout.
double moment(const Kernel1D& k, int j) {
    const double r = k.support_radius();
    return gauss_legendre(64, -r, r).integrate([&](double u) { return std::pow(u, j) * k(u); });
}

}  // namespace

TEST_CASE("every generated kernel integrates to one and has the requested order") {
    for (auto family : {KernelFamily::uniform, KernelFamily::epanechnikov, KernelFamily::quartic}) {
        for (int order : {2, 4, 6, 8}) {
            CAPTURE(to_string(family));
            CAPTURE(order);
            const Kernel1D k = Kernel1D::make(family, order);
            CHECK(moment(k, 0) == doctest::Approx(1.0).epsilon(1e-8));
            for (int j = 1; j < order; ++j) CHECK(std::abs(moment(k, j)) < 1e-6);
            CHECK(std::abs(moment(k, order)) > 1e-6);
            CHECK(k(1.01 * k.support_radius()) == 0.0);
            CHECK(k(-1.01 * k.support_radius()) == 0.0);
            CHECK(k.order() == order);
        }
    }
}

TEST_CASE("fourth-order epanechnikov has a vanishing second moment") {
    const Kernel1D k = Kernel1D::make(KernelFamily::epanechnikov, 4);
    CHECK(k.name() == KernelName::order_k_polynomial);
    CHECK(std::abs(moment(k, 2)) < 1e-6);
    // The polynomial-multiplier construction gives (15/32)(3 - 10u^2 + 7u^4) on [-1, 1].
    for (double u : {0.0, 0.3, 0.8})
        CHECK(k(u) == doctest::Approx(15.0 / 32.0 * (3.0 - 10.0 * u * u + 7.0 * std::pow(u, 4))).epsilon(1e-12));
}

TEST_CASE("base shapes") {
    const Kernel1D uni = Kernel1D::make(KernelFamily::uniform);
    CHECK(uni.support_radius() == 0.5);
    CHECK(uni(0.2) == doctest::Approx(1.0));
    CHECK_FALSE(uni.lipschitz());
    const Kernel1D epa = Kernel1D::make(KernelFamily::epanechnikov);
    CHECK(epa(0.5) == doctest::Approx(0.75 * 0.75));
    CHECK(epa.lipschitz());
    const Kernel1D quart = Kernel1D::make(KernelFamily::quartic);
    CHECK(quart(0.0) == doctest::Approx(15.0 / 16.0));
    const Kernel1D wide = Kernel1D::make(KernelFamily::uniform, 2, 1.0);
    CHECK(wide(0.9) == doctest::Approx(0.5));
    CHECK_THROWS_AS(Kernel1D::make(KernelFamily::epanechnikov, 3), OrderInfeasible);
}

TEST_CASE("kernel spec strings") {
    const KernelSpec s = parse_kernel_spec("epanechnikov:k=4");
    CHECK(s.family == KernelFamily::epanechnikov);
    REQUIRE(s.order);
    CHECK(*s.order == 4);
    CHECK_FALSE(parse_kernel_spec("quartic").order);
    CHECK_THROWS_AS(parse_kernel_spec("gaussian"), UnknownFamily);
    CHECK_THROWS_AS(parse_kernel_spec("uniform:k=x"), InputError);
}

TEST_CASE("make_kernel_set") {
    const KernelSet ks = make_kernel_set(2, 2, 6, KernelFamily::uniform);
    CHECK(ks.K1.support_radius() == 0.5);
    CHECK(ks.K1(0.0) == 1.0);
    CHECK(ks.L.dim() == 2);
    CHECK(ks.L.order() == 2);
    CHECK(ks.K.order() == 6);
    CHECK(ks.K2.dim() == 1);
    CHECK(ks.K3.dim() == 2);
    CHECK(ks.K3.order() == 2);

    CHECK_THROWS_AS(make_kernel_set(1, 2, 3, KernelFamily::uniform), OrderInfeasible);
    CHECK_THROWS_AS(make_kernel_set(2, 2, 4, KernelFamily::uniform), OrderInfeasible);
    CHECK_THROWS_AS(make_kernel_set(0, 2, 4, KernelFamily::uniform), InputError);
    CHECK_THROWS_AS(make_kernel_set(1, 3, 8, KernelFamily::uniform), OrderInfeasible);

    const KernelSet one = make_kernel_set(1, 2, 4, KernelFamily::epanechnikov, KernelFamily::uniform);
    CHECK(one.K2.dim() == 0);
    CHECK(one.K2(Vector(0)) == 1.0);
    CHECK(one.L.factor(0).family() == KernelFamily::uniform);
}

TEST_CASE("kernel constants match closed forms") {
    const auto uni = kernel_constants(Kernel1D::make(KernelFamily::uniform));
    CHECK(uni.l2_norm_sq == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(uni.conv_sq_integral == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
    const auto epa = kernel_constants(Kernel1D::make(KernelFamily::epanechnikov));
    CHECK(epa.l2_norm_sq == doctest::Approx(0.6).epsilon(1e-10));

    // Independent route: self-convolution by direct integration on the
    // overlap, squared and summed on a fine trapezoid grid in r.
    const Kernel1D e = Kernel1D::make(KernelFamily::epanechnikov);
    const int m = 4000;
    double conv_sq = 0.0;
    for (int s = 0; s <= m; ++s) {
        const double r = -2.0 + 4.0 * s / m;
        double c = 0.0;
        const double lo = std::max(-1.0, r - 1.0), hi = std::min(1.0, r + 1.0);
        if (hi > lo) c = gauss_legendre(16, lo, hi).integrate([&](double t) { return e(t) * e(t - r); });
        conv_sq += (s == 0 || s == m ? 0.5 : 1.0) * c * c * 4.0 / m;
    }
    CHECK(epa.conv_sq_integral == doctest::Approx(conv_sq).epsilon(1e-6));
}

TEST_CASE("product constants are powers of the 1-D constants") {
    const Kernel1D q = Kernel1D::make(KernelFamily::quartic);
    const auto one = kernel_constants(q);
    for (Index d : {1, 2, 3}) {
        const auto prod = kernel_constants(ProductKernel(q, d));
        CHECK(prod.l2_norm_sq == doctest::Approx(std::pow(one.l2_norm_sq, d)).epsilon(1e-8));
        CHECK(prod.conv_sq_integral == doctest::Approx(std::pow(one.conv_sq_integral, d)).epsilon(1e-8));
    }
}

TEST_CASE("refinement check") {
    const Kernel1D k = Kernel1D::make(KernelFamily::epanechnikov, 6);
    CHECK_NOTHROW(kernel_constants(k, GridSpec{}));
    CHECK_THROWS_AS(kernel_constants(k, GridSpec{RuleKind::midpoint, 8, true}), GridTooCoarse);
    const auto coarse = kernel_constants(k, GridSpec{RuleKind::gauss_legendre, 64, false});
    const auto fine = kernel_constants(k, GridSpec{RuleKind::gauss_legendre, 128, false});
    CHECK(relative_change(coarse.l2_norm_sq, fine.l2_norm_sq) < 1e-6);
    CHECK(relative_change(coarse.conv_sq_integral, fine.conv_sq_integral) < 1e-6);
}
