#include "censadd/kernels.hpp"

#include "censadd/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace censadd {

namespace {

Vector base_shape(KernelFamily family) {
    switch (family) {
        case KernelFamily::uniform: return Vector::Constant(1, 0.5);
        case KernelFamily::epanechnikov: return (Vector(3) << 0.75, 0.0, -0.75).finished();
        case KernelFamily::quartic:
            return (Vector(5) << 15.0 / 16.0, 0.0, -30.0 / 16.0, 0.0, 15.0 / 16.0).finished();
    }
    throw UnknownFamily("unknown kernel family");
}

// int_{-1}^{1} s^power p(s) ds
double canonical_moment(const Vector& p, int power) {
    double acc = 0.0;
    for (Index j = 0; j < p.size(); ++j) {
        const Index deg = j + power;
        if (deg % 2 == 0) acc += p[j] * 2.0 / static_cast<double>(deg + 1);
    }
    return acc;
}

Vector poly_mul(const Vector& a, const Vector& b) {
    Vector out = Vector::Zero(a.size() + b.size() - 1);
    for (Index i = 0; i < a.size(); ++i)
        for (Index j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

}  // namespace

std::string to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::uniform: return "uniform";
        case KernelFamily::epanechnikov: return "epanechnikov";
        case KernelFamily::quartic: return "quartic";
    }
    return "?";
}

std::string to_string(KernelName name) {
    if (name == KernelName::order_k_polynomial) return "order_k_polynomial";
    return to_string(static_cast<KernelFamily>(name));
}

KernelFamily parse_kernel_family(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "uniform") return KernelFamily::uniform;
    if (lower == "epanechnikov") return KernelFamily::epanechnikov;
    if (lower == "quartic" || lower == "biweight") return KernelFamily::quartic;
    throw UnknownFamily("unknown kernel family '" + name + "'");
}

KernelSpec parse_kernel_spec(const std::string& text) {
    KernelSpec spec;
    const auto colon = text.find(':');
    spec.family = parse_kernel_family(text.substr(0, colon));
    if (colon == std::string::npos) return spec;
    const std::string rest = text.substr(colon + 1);
    if (rest.rfind("k=", 0) != 0) throw InputError("kernel option must be 'k=<order>', got '" + rest + "'");
    try {
        std::size_t used = 0;
        spec.order = std::stoi(rest.substr(2), &used);
        if (used != rest.size() - 2) throw std::invalid_argument(rest);
    } catch (const std::exception&) {
        throw InputError("bad kernel order in '" + text + "'");
    }
    return spec;
}

Kernel1D Kernel1D::make(KernelFamily family, int order, std::optional<double> radius) {
    if (order < 2 || order % 2 != 0)
        throw OrderInfeasible("symmetric kernels need an even order >= 2, got " + std::to_string(order));
    Kernel1D kernel;
    kernel.family_ = family;
    kernel.order_ = order;
    kernel.radius_ = radius.value_or(family == KernelFamily::uniform ? 0.5 : 1.0);
    if (!(kernel.radius_ > 0.0) || !std::isfinite(kernel.radius_))
        throw InputError("kernel support radius must be positive");

    const Vector base = base_shape(family);
    const int terms = order / 2;  // multiplier sum_m a_m s^{2m}, m < terms
    Eigen::MatrixXd hankel(terms, terms);
    for (int j = 0; j < terms; ++j)
        for (int m = 0; m < terms; ++m) hankel(j, m) = canonical_moment(base, 2 * (j + m));
    Vector rhs = Vector::Zero(terms);
    rhs[0] = 1.0;
    const Vector a = hankel.fullPivLu().solve(rhs);

    Vector multiplier = Vector::Zero(2 * terms - 1);
    for (int m = 0; m < terms; ++m) multiplier[2 * m] = a[m];
    kernel.coeffs_ = poly_mul(multiplier, base);
    return kernel;
}

std::string Kernel1D::describe() const {
    std::ostringstream os;
    os << to_string(family_) << ":k=" << order_ << "@r=" << radius_;
    return os.str();
}

KernelSet make_kernel_set(Index d, int k, int k_prime, KernelFamily family,
                          std::optional<KernelFamily> test_family) {
    if (d < 1) throw InputError("dimension must be at least 1");
    if (k < 2 || k % 2 != 0) throw OrderInfeasible("k must be an even integer >= 2, got " + std::to_string(k));
    if (k_prime <= k * d)
        throw OrderInfeasible("k' = " + std::to_string(k_prime) + " must exceed k*d = " + std::to_string(k * d));
    if (k_prime % 2 != 0)
        throw OrderInfeasible("k' = " + std::to_string(k_prime) +
                              " is not an admissible (even) order; raise it to " + std::to_string(k_prime + 1));

    KernelSet set;
    set.d = d;
    set.k = k;
    set.k_prime = k_prime;
    set.K1 = Kernel1D::make(family, k);
    set.L = ProductKernel(Kernel1D::make(test_family.value_or(family), 2), d);
    set.K = ProductKernel(Kernel1D::make(family, k_prime), d);
    set.K2 = ProductKernel(set.K1, d - 1);
    set.K3 = ProductKernel(set.K1, d);
    return set;
}

namespace {

KernelConstants constants_at(const Kernel1D& L, const GridSpec& grid) {
    const double R = L.support_radius();
    KernelConstants c;
    c.l2_norm_sq = make_rule(grid.rule, grid.nodes, -R, R).integrate([&](double t) { return L(t) * L(t); });
    // Self-convolution is even in r and vanishes beyond 2R; for r >= 0 the
    // factors overlap on [r - R, R].
    const Rule1D outer = make_rule(grid.rule, grid.nodes, 0.0, 2.0 * R);
    c.conv_sq_integral = 2.0 * outer.integrate([&](double r) {
        const Rule1D inner = make_rule(grid.rule, grid.nodes, r - R, R);
        const double conv = inner.integrate([&](double t) { return L(t) * L(t - r); });
        return conv * conv;
    });
    return c;
}

}  // namespace

KernelConstants kernel_constants(const Kernel1D& L, const GridSpec& grid) {
    const KernelConstants coarse = constants_at(L, grid);
    if (grid.check_refinement) {
        const KernelConstants fine = constants_at(L, grid.refined());
        if (relative_change(coarse.l2_norm_sq, fine.l2_norm_sq) > 1e-6 ||
            relative_change(coarse.conv_sq_integral, fine.conv_sq_integral) > 1e-6)
            throw GridTooCoarse("kernel constants not converged at " + std::to_string(grid.nodes) + " nodes");
    }
    if (!(coarse.l2_norm_sq > 0.0) || !(coarse.conv_sq_integral > 0.0) || !std::isfinite(coarse.l2_norm_sq) ||
        !std::isfinite(coarse.conv_sq_integral))
        throw NonpositiveVariance("kernel constants must be positive and finite");
    return coarse;
}

KernelConstants kernel_constants(const ProductKernel& L, const GridSpec& grid) {
    KernelConstants c{1.0, 1.0};
    for (Index j = 0; j < L.dim(); ++j) {
        const KernelConstants f = kernel_constants(L.factor(j), grid);
        c.l2_norm_sq *= f.l2_norm_sq;
        c.conv_sq_integral *= f.conv_sq_integral;
    }
    return c;
}

}  // namespace censadd
