#pragma once

#include "censadd/types.hpp"

#include <string>
#include <vector>

namespace censadd {

enum class RuleKind { gauss_legendre, midpoint, trapezoid };

std::string to_string(RuleKind kind);
RuleKind parse_rule_kind(const std::string& name);

/// Nodes and weights of a one-dimensional rule on a finite interval.
struct Rule1D {
    Vector nodes;
    Vector weights;

    Index size() const { return nodes.size(); }
    template <class F>
    double integrate(F&& f) const {
        double acc = 0.0;
        for (Index i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
        return acc;
    }
};

Rule1D gauss_legendre(int n, double a, double b);
Rule1D midpoint_rule(int n, double a, double b);
Rule1D trapezoid_rule(int n, double a, double b);
Rule1D make_rule(RuleKind kind, int n, double a, double b);

/// Resolution of a tensor-product rule, shared by every axis.
struct GridSpec {
    RuleKind rule = RuleKind::gauss_legendre;
    int nodes = 64;
    bool check_refinement = true;

    GridSpec refined() const { return {rule, 2 * nodes, false}; }
};

/// Flattened tensor-product rule: one row of `points` per node.
struct TensorGrid {
    Matrix points;
    Vector weights;

    Index size() const { return weights.size(); }
    Index dim() const { return points.cols(); }
};

TensorGrid tensor_grid(const std::vector<Rule1D>& rules);
TensorGrid tensor_grid(const GridSpec& spec, const Box& box);

/// |a - b| / max(|a|, |b|), with 0 when both vanish.
double relative_change(double a, double b);

}  // namespace censadd
