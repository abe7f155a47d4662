#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>

namespace censadd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Axis-aligned closed box [lo_1, hi_1] x ... x [lo_d, hi_d].
struct Box {
    Vector lo;
    Vector hi;

    Box() = default;
    Box(Vector lower, Vector upper);

    static Box cube(Index d, double lower, double upper);

    Index dim() const { return lo.size(); }
    double volume() const { return (hi - lo).prod(); }
    bool contains(const Eigen::Ref<const Vector>& x) const;
    /// True when every face of this box lies strictly inside `outer`.
    bool strictly_inside(const Box& outer) const;
    /// Drop axis `l`.
    Box without_axis(Index l) const;
    std::string to_string() const;
};

}  // namespace censadd
