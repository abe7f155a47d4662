#include "censadd/types.hpp"

#include "censadd/errors.hpp"

#include <sstream>

namespace censadd {

Box::Box(Vector lower, Vector upper) : lo(std::move(lower)), hi(std::move(upper)) {
    if (lo.size() != hi.size()) throw InputError("box bounds differ in dimension");
    if ((hi.array() <= lo.array()).any()) throw InputError("box has an empty side: " + to_string());
}

Box Box::cube(Index d, double lower, double upper) {
    return Box(Vector::Constant(d, lower), Vector::Constant(d, upper));
}

bool Box::contains(const Eigen::Ref<const Vector>& x) const {
    return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
}

bool Box::strictly_inside(const Box& outer) const {
    return dim() == outer.dim() && (lo.array() > outer.lo.array()).all() &&
           (hi.array() < outer.hi.array()).all();
}

Box Box::without_axis(Index l) const {
    Box out;
    out.lo.resize(dim() - 1);
    out.hi.resize(dim() - 1);
    for (Index j = 0, k = 0; j < dim(); ++j) {
        if (j == l) continue;
        out.lo[k] = lo[j];
        out.hi[k] = hi[j];
        ++k;
    }
    return out;
}

std::string Box::to_string() const {
    std::ostringstream os;
    for (Index j = 0; j < lo.size(); ++j) {
        if (j) os << "x";
        os << "[" << lo[j] << "," << hi[j] << "]";
    }
    return os.str();
}

}  // namespace censadd
