#include "censadd/statistic.hpp"

#include "censadd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace censadd {

Vector residuals(const Matrix& x, const Vector& responses, const AdditiveFit& fit) {
    return responses - fit.evaluate(x);
}

std::string to_string(OuterIntegration method) { return method == OuterIntegration::exact ? "exact" : "grid"; }

OuterIntegration parse_outer_integration(const std::string& name) {
    if (name == "exact") return OuterIntegration::exact;
    if (name == "grid") return OuterIntegration::grid;
    throw InputError("unknown outer integration '" + name + "'");
}

std::string to_string(BvMode mode) { return mode == BvMode::plugin ? "plugin" : "oracle"; }

BvMode parse_bv_mode(const std::string& name) {
    if (name == "plugin") return BvMode::plugin;
    if (name == "oracle") return BvMode::oracle;
    throw InputError("unknown B/V mode '" + name + "'");
}

namespace {

struct Contributors {
    std::vector<Index> index;  // sample indices whose window meets g
    Matrix x;                  // their covariates
    Vector a;                  // eps_i / f_n(X_i)
};

Contributors contributors(const Matrix& x, const Vector& eps, const Vector& f, const ProductKernel& L, double ell,
                          const Box& g_box, double floor) {
    std::vector<Index> keep;
    std::vector<std::size_t> hits;
    for (Index i = 0; i < x.rows(); ++i) {
        bool meets = true;
        for (Index k = 0; k < x.cols() && meets; ++k) {
            const double reach = L.factor(k).support_radius() * ell;
            meets = x(i, k) - reach < g_box.hi[k] && x(i, k) + reach > g_box.lo[k];
        }
        if (!meets) continue;
        if (!(f[i] >= floor)) hits.push_back(static_cast<std::size_t>(i));
        keep.push_back(i);
    }
    if (!hits.empty()) throw DensityFloorHit(std::move(hits));
    Contributors c;
    c.index = keep;
    c.x.resize(static_cast<Index>(keep.size()), x.cols());
    c.a.resize(static_cast<Index>(keep.size()));
    for (std::size_t r = 0; r < keep.size(); ++r) {
        c.x.row(static_cast<Index>(r)) = x.row(keep[r]);
        c.a[static_cast<Index>(r)] = eps[keep[r]] / f[keep[r]];
    }
    return c;
}

double grid_sum(const Contributors& c, const ProductKernel& L, double ell, const Box& g_box, const GridSpec& spec) {
    const TensorGrid grid = tensor_grid(spec, g_box);
    if (c.index.empty()) return 0.0;
    std::vector<Kernel1D> factors;
    for (Index k = 0; k < L.dim(); ++k) factors.push_back(L.factor(k));
    const WindowedKernelSum sum(c.x, factors, Vector::Constant(L.dim(), ell));
    double acc = 0.0;
    Vector node(grid.dim());
    for (Index r = 0; r < grid.size(); ++r) {
        node = grid.points.row(r).transpose();
        double s = 0.0;
        sum.for_each_neighbor(node, [&](Index i, double w) { s += c.a[i] * w; });
        acc += grid.weights[r] * s * s;
    }
    return acc;
}

double pairwise_sum(const Contributors& c, const ProductKernel& L, double ell, const Box& g_box) {
    const Index m = c.x.rows();
    const Index d = c.x.cols();
    if (m == 0) return 0.0;
    int degree = 0;
    for (Index k = 0; k < d; ++k) degree = std::max(degree, static_cast<int>(L.factor(k).coefficients().size()) - 1);
    const Rule1D canonical = gauss_legendre(degree + 2, -1.0, 1.0);

    auto overlap = [&](Index i, Index j) {
        double prod = 1.0;
        for (Index k = 0; k < d && prod != 0.0; ++k) {
            const Kernel1D& f = L.factor(k);
            const double reach = f.support_radius() * ell;
            const double lo = std::max({g_box.lo[k], c.x(i, k) - reach, c.x(j, k) - reach});
            const double hi = std::min({g_box.hi[k], c.x(i, k) + reach, c.x(j, k) + reach});
            if (!(hi > lo)) return 0.0;
            const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
            double acc = 0.0;
            for (Index q = 0; q < canonical.size(); ++q) {
                const double t = mid + half * canonical.nodes[q];
                acc += canonical.weights[q] * f((t - c.x(i, k)) / ell) * f((t - c.x(j, k)) / ell);
            }
            prod *= half * acc;
        }
        return prod;
    };

    std::vector<Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return c.x(a, 0) < c.x(b, 0); });
    const double span = 2.0 * L.factor(0).support_radius() * ell;

    double diag = 0.0, off = 0.0;
    for (std::size_t p = 0; p < order.size(); ++p) {
        const Index i = order[p];
        diag += c.a[i] * c.a[i] * overlap(i, i);
        for (std::size_t q = p + 1; q < order.size(); ++q) {
            const Index j = order[q];
            if (c.x(j, 0) - c.x(i, 0) > span) break;
            off += c.a[i] * c.a[j] * overlap(i, j);
        }
    }
    return diag + 2.0 * off;
}

}  // namespace

double test_statistic(const Matrix& x, const Vector& eps, const Vector& f_at_sample, const ProductKernel& L,
                      double ell, const Box& g_box, const OuterSpec& outer, double floor) {
    const Index n = x.rows();
    const Index d = x.cols();
    if (eps.size() != n || f_at_sample.size() != n) throw InputError("residuals and densities must match the sample");
    if (L.dim() != d || g_box.dim() != d) throw InputError("L and g must match the covariate dimension");
    if (!(ell > 0.0)) throw InputError("ell_n must be positive");

    const Contributors c = contributors(x, eps, f_at_sample, L, ell, g_box, floor);
    const double norm = static_cast<double>(n) * std::pow(ell, static_cast<double>(d));
    const double scale = 1.0 / (norm * norm);

    if (outer.method == OuterIntegration::exact) return scale * pairwise_sum(c, L, ell, g_box);

    const double coarse = scale * grid_sum(c, L, ell, g_box, outer.grid);
    if (outer.grid.check_refinement) {
        const double fine = scale * grid_sum(c, L, ell, g_box, outer.grid.refined());
        if (relative_change(coarse, fine) > 1e-6)
            throw GridTooCoarse("T_n moved by " + std::to_string(relative_change(coarse, fine)) +
                                " (relative) under grid refinement");
    }
    return coarse;
}

InternalSmoother estimate_sigma0_sq(const Matrix& x, const Vector& eps, const ProductKernel& K3, double h1,
                                    const Vector& f_at_sample, double floor) {
    const Vector sq = eps.array().square();
    return full_regression(x, sq, f_at_sample, K3, h1, floor);
}

VarianceEstimates plugin_B_V(const PointFunction& sigma0_sq, const PointFunction& f, const Box& g_box,
                             const KernelConstants& constants, const GridSpec& grid, BvMode mode, double floor) {
    const TensorGrid nodes = tensor_grid(grid, g_box);
    VarianceEstimates out;
    out.mode = mode;
    out.grid_points = nodes.points;
    out.sigma0_sq_grid.resize(nodes.size());
    double b_int = 0.0, v_int = 0.0;
    std::vector<std::size_t> hits;
    Vector p(nodes.dim());
    for (Index r = 0; r < nodes.size(); ++r) {
        p = nodes.points.row(r).transpose();
        const double s2 = sigma0_sq(p);
        const double fx = f(p);
        out.sigma0_sq_grid[r] = s2;
        if (!(fx >= floor)) {
            hits.push_back(static_cast<std::size_t>(r));
            continue;
        }
        b_int += nodes.weights[r] * s2 / fx;
        v_int += nodes.weights[r] * s2 * s2 / (fx * fx);
    }
    if (!hits.empty()) throw DensityFloorHit(std::move(hits));
    out.B_hat = b_int * constants.l2_norm_sq;
    out.V_hat = 2.0 * v_int * constants.conv_sq_integral;
    if (!(out.V_hat > 0.0) || !std::isfinite(out.V_hat))
        throw NonpositiveVariance("V_hat = " + std::to_string(out.V_hat) + " (B_hat = " + std::to_string(out.B_hat) + ")");
    return out;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double upper_tail_normal(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

TestReport standardize(double t_n_star, double B_hat, double V_hat, Index n, Index d, double ell_n) {
    if (!(V_hat > 0.0)) throw NonpositiveVariance("V_hat must be positive to standardize");
    TestReport r;
    r.t_n_star = t_n_star;
    r.B_hat = B_hat;
    r.V_hat = V_hat;
    r.n = n;
    r.d = d;
    r.ell_n = ell_n;
    const double half = static_cast<double>(d) / 2.0;
    r.z = (static_cast<double>(n) * std::pow(ell_n, half) * t_n_star - B_hat * std::pow(ell_n, -half)) / std::sqrt(V_hat);
    r.p_value = upper_tail_normal(r.z);
    return r;
}

}  // namespace censadd
