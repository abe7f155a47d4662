#include "censadd/quadrature.hpp"

#include "censadd/errors.hpp"

#include <cmath>
#include <numbers>

namespace censadd {

std::string to_string(RuleKind kind) {
    switch (kind) {
        case RuleKind::gauss_legendre: return "gauss_legendre";
        case RuleKind::midpoint: return "midpoint";
        case RuleKind::trapezoid: return "trapezoid";
    }
    return "?";
}

RuleKind parse_rule_kind(const std::string& name) {
    if (name == "gauss_legendre" || name == "gl") return RuleKind::gauss_legendre;
    if (name == "midpoint") return RuleKind::midpoint;
    if (name == "trapezoid") return RuleKind::trapezoid;
    throw InputError("unknown quadrature rule '" + name + "'");
}

// Newton iteration on the three-term Legendre recurrence.
Rule1D gauss_legendre(int n, double a, double b) {
    if (n < 1) throw InputError("quadrature needs at least one node");
    Rule1D rule{Vector(n), Vector(n)};
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double step = p1 / dp;
            x -= step;
            if (std::abs(step) < 1e-16) break;
        }
        // Recompute the derivative at the converged root.
        double p0 = 1.0, p1 = x;
        for (int j = 2; j <= n; ++j) {
            const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        dp = (n == 1) ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = mid - half * x;
        rule.nodes[n - 1 - i] = mid + half * x;
        rule.weights[i] = half * w;
        rule.weights[n - 1 - i] = half * w;
    }
    return rule;
}

Rule1D midpoint_rule(int n, double a, double b) {
    if (n < 1) throw InputError("quadrature needs at least one node");
    const double step = (b - a) / n;
    Rule1D rule{Vector(n), Vector::Constant(n, step)};
    for (int i = 0; i < n; ++i) rule.nodes[i] = a + (i + 0.5) * step;
    return rule;
}

Rule1D trapezoid_rule(int n, double a, double b) {
    if (n < 2) throw InputError("trapezoid rule needs at least two nodes");
    const double step = (b - a) / (n - 1);
    Rule1D rule{Vector::LinSpaced(n, a, b), Vector::Constant(n, step)};
    rule.weights[0] = rule.weights[n - 1] = 0.5 * step;
    return rule;
}

Rule1D make_rule(RuleKind kind, int n, double a, double b) {
    switch (kind) {
        case RuleKind::gauss_legendre: return gauss_legendre(n, a, b);
        case RuleKind::midpoint: return midpoint_rule(n, a, b);
        case RuleKind::trapezoid: return trapezoid_rule(n, a, b);
    }
    throw InputError("unknown quadrature rule");
}

TensorGrid tensor_grid(const std::vector<Rule1D>& rules) {
    const Index d = static_cast<Index>(rules.size());
    Index total = 1;
    for (const auto& r : rules) total *= r.size();
    TensorGrid grid{Matrix(total, d), Vector(total)};
    std::vector<Index> pos(d, 0);
    for (Index row = 0; row < total; ++row) {
        double w = 1.0;
        for (Index j = 0; j < d; ++j) {
            grid.points(row, j) = rules[j].nodes[pos[j]];
            w *= rules[j].weights[pos[j]];
        }
        grid.weights[row] = w;
        // Odometer increment, last axis fastest.
        for (Index j = d - 1; j >= 0; --j) {
            if (++pos[j] < rules[j].size()) break;
            pos[j] = 0;
        }
    }
    return grid;
}

TensorGrid tensor_grid(const GridSpec& spec, const Box& box) {
    std::vector<Rule1D> rules;
    rules.reserve(box.dim());
    for (Index j = 0; j < box.dim(); ++j) rules.push_back(make_rule(spec.rule, spec.nodes, box.lo[j], box.hi[j]));
    return tensor_grid(rules);
}

double relative_change(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace censadd
