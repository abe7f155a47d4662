#include "censadd/additive.hpp"

#include "censadd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace censadd {

std::string to_string(DensityShape shape) { return shape == DensityShape::uniform ? "uniform" : "bump"; }

DensityShape parse_density_shape(const std::string& name) {
    if (name == "uniform") return DensityShape::uniform;
    if (name == "bump") return DensityShape::bump;
    throw InputError("unknown integration density '" + name + "'");
}

IntervalDensity::IntervalDensity(DensityShape shape, double lower, double upper, int power)
    : shape_(shape), lower_(lower), upper_(upper), power_(power), norm_(1.0) {
    if (!(upper > lower)) throw InputError("integration density needs a nonempty interval");
    if (shape == DensityShape::bump) {
        if (power < 1) throw InputError("bump density power must be >= 1");
        norm_ = 1.0 / std::beta(0.5, power + 1.0);  // int_{-1}^{1} (1 - s^2)^p ds = B(1/2, p + 1)
    }
}

double IntervalDensity::operator()(double u) const {
    if (u < lower_ || u > upper_) return 0.0;
    const double width = upper_ - lower_;
    if (shape_ == DensityShape::uniform) return 1.0 / width;
    const double s = (2.0 * u - lower_ - upper_) / width;
    return norm_ * std::pow(1.0 - s * s, power_) * 2.0 / width;
}

double IntervalDensity::sup() const {
    const double width = upper_ - lower_;
    return shape_ == DensityShape::uniform ? 1.0 / width : norm_ * 2.0 / width;
}

double IntervalDensity::sample(std::mt19937_64& rng) const {
    if (shape_ == DensityShape::uniform) return std::uniform_real_distribution<double>(lower_, upper_)(rng);
    std::gamma_distribution<double> gamma(power_ + 1.0, 1.0);
    const double a = gamma(rng);
    const double b = gamma(rng);
    const double t = a / (a + b);
    return lower_ + t * (upper_ - lower_);
}

double IntegrationDensities::q(const Eigen::Ref<const Vector>& x) const {
    double acc = 1.0;
    for (Index j = 0; j < dim(); ++j) acc *= factors[static_cast<std::size_t>(j)](x[j]);
    return acc;
}

double IntegrationDensities::q_without(Index l, const Eigen::Ref<const Vector>& x) const {
    double acc = 1.0;
    for (Index j = 0; j < dim(); ++j)
        if (j != l) acc *= factors[static_cast<std::size_t>(j)](x[j]);
    return acc;
}

Box IntegrationDensities::support() const {
    Vector lo(dim()), hi(dim());
    for (Index j = 0; j < dim(); ++j) {
        lo[j] = factors[static_cast<std::size_t>(j)].lower();
        hi[j] = factors[static_cast<std::size_t>(j)].upper();
    }
    return Box(lo, hi);
}

IntegrationDensities IntegrationDensities::on_box(const Box& box, DensityShape shape, int power) {
    IntegrationDensities out;
    for (Index j = 0; j < box.dim(); ++j) out.factors.emplace_back(shape, box.lo[j], box.hi[j], power);
    return out;
}

void EvaluationRegion::validate() const {
    if (domain.dim() != g.dim()) throw InputError("weight box and domain differ in dimension");
    if (!(alpha > 0.0)) throw InputError("margin alpha must be positive");
    if (!g.strictly_inside(domain))
        throw InputError("weight box " + g.to_string() + " must lie strictly inside " + domain.to_string());
}

double ComponentCurve::operator()(double u) const {
    const Index m = grid.size();
    if (u <= grid[0]) return values[0];
    if (u >= grid[m - 1]) return values[m - 1];
    const auto* begin = grid.data();
    const Index hi = std::upper_bound(begin, begin + m, u) - begin;
    const Index lo = hi - 1;
    const double t = (u - grid[lo]) / (grid[hi] - grid[lo]);
    return (1.0 - t) * values[lo] + t * values[hi];
}

namespace {

Vector trapezoid_weights(const Vector& grid) {
    const Index m = grid.size();
    Vector w = Vector::Zero(m);
    for (Index g = 0; g + 1 < m; ++g) {
        const double half = 0.5 * (grid[g + 1] - grid[g]);
        w[g] += half;
        w[g + 1] += half;
    }
    return w;
}

double weighted_average(const Vector& grid, const Vector& values, const IntervalDensity& q_l) {
    const Vector w = trapezoid_weights(grid);
    double num = 0.0, den = 0.0;
    for (Index g = 0; g < grid.size(); ++g) {
        const double wq = w[g] * q_l(grid[g]);
        num += wq * values[g];
        den += wq;
    }
    return num / den;
}

// Normalised nodes/weights on a sub-collection of axes; `axes` lists the
// coordinates of the full point the rows fill in.
struct NodeSet {
    std::vector<Index> axes;
    Matrix points;
    Vector weights;
};

NodeSet integration_nodes(const IntegrationDensities& q, std::vector<Index> axes, const FitGridSpec& spec,
                          std::uint64_t stream) {
    NodeSet set;
    set.axes = std::move(axes);
    const auto k = static_cast<Index>(set.axes.size());
    if (q.dim() > spec.mc_above_dim) {
        std::mt19937_64 rng(spec.mc_seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
        set.points.resize(spec.mc_points, k);
        for (Index r = 0; r < spec.mc_points; ++r)
            for (Index c = 0; c < k; ++c) set.points(r, c) = q.factors[static_cast<std::size_t>(set.axes[static_cast<std::size_t>(c)])].sample(rng);
        set.weights = Vector::Constant(spec.mc_points, 1.0 / spec.mc_points);
        return set;
    }
    std::vector<Rule1D> rules;
    for (Index a : set.axes) {
        const auto& f = q.factors[static_cast<std::size_t>(a)];
        rules.push_back(make_rule(spec.inner.rule, spec.inner.nodes, f.lower(), f.upper()));
    }
    TensorGrid grid = tensor_grid(rules);
    for (Index r = 0; r < grid.size(); ++r)
        for (Index c = 0; c < k; ++c)
            grid.weights[r] *= q.factors[static_cast<std::size_t>(set.axes[static_cast<std::size_t>(c)])](grid.points(r, c));
    const double total = grid.weights.sum();
    if (!(total > 0.0)) throw GridTooCoarse("integration rule puts no mass on the density support");
    set.points = std::move(grid.points);
    set.weights = grid.weights / total;
    return set;
}

bool monte_carlo(const IntegrationDensities& q, const FitGridSpec& spec) { return q.dim() > spec.mc_above_dim; }

ComponentCurve component_at(Index l, const InternalSmoother& m, const IntegrationDensities& q, const FitGridSpec& spec) {
    const Index d = q.dim();
    std::vector<Index> others;
    for (Index j = 0; j < d; ++j)
        if (j != l) others.push_back(j);
    const NodeSet inner = integration_nodes(q, others, spec, static_cast<std::uint64_t>(l));
    const IntervalDensity& q_l = q.factors[static_cast<std::size_t>(l)];

    ComponentCurve curve;
    curve.axis = l;
    curve.grid = Vector::LinSpaced(spec.curve_points, q_l.lower(), q_l.upper());
    Vector first(spec.curve_points);
    Vector point(d);
    for (Index g = 0; g < spec.curve_points; ++g) {
        point[l] = curve.grid[g];
        double acc = 0.0;
        for (Index r = 0; r < inner.weights.size(); ++r) {
            for (std::size_t c = 0; c < inner.axes.size(); ++c) point[inner.axes[c]] = inner.points(r, static_cast<Index>(c));
            acc += inner.weights[r] * m(point);
        }
        first[g] = acc;
    }
    curve.values = first.array() - weighted_average(curve.grid, first, q_l);
    return curve;
}

double mu_at(const InternalSmoother& m, const IntegrationDensities& q, const FitGridSpec& spec) {
    std::vector<Index> all(static_cast<std::size_t>(q.dim()));
    for (Index j = 0; j < q.dim(); ++j) all[static_cast<std::size_t>(j)] = j;
    const NodeSet nodes = integration_nodes(q, all, spec, 0xfeedULL);
    double acc = 0.0;
    Vector point(q.dim());
    for (Index r = 0; r < nodes.weights.size(); ++r) {
        point = nodes.points.row(r).transpose();
        acc += nodes.weights[r] * m(point);
    }
    return acc;
}

}  // namespace

double ComponentCurve::centered_integral(const IntervalDensity& q_l) const {
    return weighted_average(grid, values, q_l);
}

void ComponentCurve::write_csv(std::ostream& os) const {
    os << "x" << axis + 1 << ",eta_hat_" << axis + 1 << "\n";
    os.precision(17);
    for (Index g = 0; g < grid.size(); ++g) os << grid[g] << ',' << values[g] << '\n';
}

double AdditiveFit::operator()(const Eigen::Ref<const Vector>& x) const {
    double acc = mu_hat;
    for (const auto& c : components) acc += c(x[c.axis]);
    return acc;
}

Vector AdditiveFit::evaluate(const Matrix& points) const {
    Vector out(points.rows());
    Vector p(points.cols());
    for (Index r = 0; r < points.rows(); ++r) {
        p = points.row(r).transpose();
        out[r] = (*this)(p);
    }
    return out;
}

FitGridSpec FitGridSpec::refined() const {
    FitGridSpec out = *this;
    out.curve_points = 2 * curve_points - 1;
    out.inner = inner.refined();
    out.mc_points = 2 * mc_points;
    return out;
}

ComponentCurve estimate_component(Index l, const InternalSmoother& directional, const IntegrationDensities& densities,
                                  const FitGridSpec& grid) {
    if (l < 0 || l >= densities.dim()) throw AxisOutOfRange("component axis " + std::to_string(l) + " out of range");
    if (directional.dim() != densities.dim()) throw InputError("estimator and densities differ in dimension");
    if (grid.curve_points < 2) throw InputError("component curves need at least two grid points");
    ComponentCurve curve = component_at(l, directional, densities, grid);
    if (grid.inner.check_refinement && !monte_carlo(densities, grid)) {
        const ComponentCurve fine = component_at(l, directional, densities, grid.refined());
        double worst = 0.0;
        for (Index g = 0; g < curve.grid.size(); ++g) worst = std::max(worst, std::abs(curve.values[g] - fine.values[2 * g]));
        if (worst > grid.refinement_tol)
            throw GridTooCoarse("component " + std::to_string(l + 1) + " moved by " + std::to_string(worst) +
                                " under grid refinement");
    }
    return curve;
}

double integrate_against_q(const InternalSmoother& full, const IntegrationDensities& densities, const FitGridSpec& grid) {
    const double coarse = mu_at(full, densities, grid);
    if (grid.inner.check_refinement && !monte_carlo(densities, grid)) {
        const double fine = mu_at(full, densities, grid.refined());
        if (std::abs(coarse - fine) > grid.refinement_tol)
            throw GridTooCoarse("int m q dx moved by " + std::to_string(std::abs(coarse - fine)) + " under grid refinement");
    }
    return coarse;
}

AdditiveFit additive_fit(const Matrix& x, const Vector& responses, const Vector& f_at_sample, const KernelSet& kernels,
                         const Bandwidths& bandwidths, const IntegrationDensities& densities, const FitGridSpec& grid,
                         double floor) {
    const Index d = x.cols();
    if (kernels.d != d || densities.dim() != d) throw InputError("kernels, densities and covariates differ in dimension");
    AdditiveFit fit;
    const InternalSmoother full = full_regression(x, responses, f_at_sample, kernels.K3, bandwidths.h1, floor);
    fit.mu_hat = integrate_against_q(full, densities, grid);
    for (Index l = 0; l < d; ++l) {
        const InternalSmoother dir = directional_regression(x, responses, f_at_sample, kernels.K1, kernels.K2,
                                                            bandwidths.h1, bandwidths.h2, l, floor);
        fit.components.push_back(estimate_component(l, dir, densities, grid));
    }
    return fit;
}

AdditiveFit additive_fit(const CensoredSample& sample, const PsiSpec& psi, const KernelSet& kernels,
                         const Bandwidths& bandwidths, const IntegrationDensities& densities, const FitGridSpec& grid,
                         KmCounting counting) {
    sample.validate();
    psi.validate();
    const StepSurvival g_n = kaplan_meier_censoring(sample, counting);
    const Vector r = ipcw_responses(sample, g_n, psi);
    const Vector f = density_estimate(sample, kernels.K, bandwidths.h_n).at_sample();
    return additive_fit(sample.x, r, f, kernels, bandwidths, densities, grid);
}

}  // namespace censadd
