#include "censadd/smoothing.hpp"

#include "censadd/errors.hpp"

#include <numeric>

namespace censadd {

DensityFloorHit::DensityFloorHit(std::vector<std::size_t> indices)
    : Error([&] {
          std::string msg = "density estimate below floor at contributing sample point(s):";
          for (std::size_t k = 0; k < indices.size() && k < 20; ++k) msg += " " + std::to_string(indices[k]);
          if (indices.size() > 20) msg += " ...";
          return msg;
      }()),
      indices_(std::move(indices)) {}

WindowedKernelSum::WindowedKernelSum(const Matrix& x, std::vector<Kernel1D> factors, Vector bandwidths)
    : points_(x.transpose()), factors_(std::move(factors)), bandwidths_(std::move(bandwidths)) {
    if (static_cast<Index>(factors_.size()) != x.cols() || bandwidths_.size() != x.cols())
        throw InputError("kernel factors and bandwidths must match the covariate dimension");
    if ((bandwidths_.array() <= 0.0).any()) throw InputError("bandwidths must be positive");
    reach_.resize(x.cols());
    for (Index j = 0; j < x.cols(); ++j) reach_[j] = factors_[static_cast<std::size_t>(j)].support_radius() * bandwidths_[j];

    order_.resize(static_cast<std::size_t>(x.rows()));
    std::iota(order_.begin(), order_.end(), Index{0});
    std::stable_sort(order_.begin(), order_.end(), [&](Index a, Index b) { return points_(0, a) < points_(0, b); });
    sorted_axis0_.resize(order_.size());
    for (std::size_t k = 0; k < order_.size(); ++k) sorted_axis0_[k] = points_(0, order_[k]);
}

double WindowedKernelSum::kernel_weight(Index i, const Eigen::Ref<const Vector>& x) const {
    double w = 1.0;
    for (Index j = 0; j < dim(); ++j) w *= factors_[static_cast<std::size_t>(j)]((x[j] - points_(j, i)) / bandwidths_[j]);
    return w;
}

namespace {

std::vector<Kernel1D> factors_of(const ProductKernel& K) {
    std::vector<Kernel1D> out;
    for (Index j = 0; j < K.dim(); ++j) out.push_back(K.factor(j));
    return out;
}

}  // namespace

DensityEstimate::DensityEstimate(const Matrix& x, const ProductKernel& K, double h)
    : x_(x), kernel_(K), h_(h), scale_(0.0) {
    if (!(h > 0.0)) throw InputError("density bandwidth must be positive");
    if (K.dim() != x.cols()) throw InputError("density kernel dimension does not match the covariates");
    scale_ = 1.0 / (static_cast<double>(x.rows()) * std::pow(h, static_cast<double>(x.cols())));
    sum_ = WindowedKernelSum(x, factors_of(K), Vector::Constant(x.cols(), h));
}

double DensityEstimate::operator()(const Eigen::Ref<const Vector>& point) const {
    double acc = 0.0;
    sum_.for_each_neighbor(point, [&](Index, double w) { acc += w; });
    return acc * scale_;
}

Vector DensityEstimate::at_sample() const { return evaluate(x_); }

Vector DensityEstimate::evaluate(const Matrix& points) const {
    Vector out(points.rows());
    Vector p(points.cols());
    for (Index r = 0; r < points.rows(); ++r) {
        p = points.row(r).transpose();
        out[r] = (*this)(p);
    }
    return out;
}

DensityEstimate density_estimate(const CensoredSample& sample, const ProductKernel& K, double h) {
    return DensityEstimate(sample.x, K, h);
}

InternalSmoother::InternalSmoother(const Matrix& x, const Vector& responses, const Vector& f_at_sample,
                                   std::vector<Kernel1D> factors, Vector bandwidths, double floor)
    : sum_(x, std::move(factors), bandwidths), f_at_sample_(f_at_sample), floor_(floor) {
    const Index n = x.rows();
    if (responses.size() != n || f_at_sample.size() != n)
        throw InputError("responses and density values must have one entry per sample point");
    const double norm = static_cast<double>(n) * bandwidths.prod();
    weight_scale_.resize(n);
    coeffs_.resize(n);
    below_floor_.assign(static_cast<std::size_t>(n), 0);
    for (Index i = 0; i < n; ++i) {
        if (!(f_at_sample[i] >= floor_)) {
            below_floor_[static_cast<std::size_t>(i)] = 1;
            weight_scale_[i] = 0.0;
            coeffs_[i] = 0.0;
            continue;
        }
        weight_scale_[i] = 1.0 / (norm * f_at_sample[i]);
        coeffs_[i] = responses[i] * weight_scale_[i];
    }
}

double InternalSmoother::operator()(const Eigen::Ref<const Vector>& point) const {
    double acc = 0.0;
    std::vector<std::size_t> hits;
    sum_.for_each_neighbor(point, [&](Index i, double w) {
        if (below_floor_[static_cast<std::size_t>(i)]) hits.push_back(static_cast<std::size_t>(i));
        acc += coeffs_[i] * w;
    });
    if (!hits.empty()) {
        std::sort(hits.begin(), hits.end());
        throw DensityFloorHit(std::move(hits));
    }
    return acc;
}

Vector InternalSmoother::evaluate(const Matrix& points) const {
    Vector out(points.rows());
    Vector p(points.cols());
    for (Index r = 0; r < points.rows(); ++r) {
        p = points.row(r).transpose();
        out[r] = (*this)(p);
    }
    return out;
}

double InternalSmoother::weight(Index i, const Eigen::Ref<const Vector>& point) const {
    const double k = sum_.kernel_weight(i, point);
    if (k != 0.0 && below_floor_[static_cast<std::size_t>(i)]) throw DensityFloorHit({static_cast<std::size_t>(i)});
    return k * weight_scale_[i];
}

double InternalSmoother::weight_sum(const Eigen::Ref<const Vector>& point) const {
    double acc = 0.0;
    std::vector<std::size_t> hits;
    sum_.for_each_neighbor(point, [&](Index i, double w) {
        if (below_floor_[static_cast<std::size_t>(i)]) hits.push_back(static_cast<std::size_t>(i));
        acc += weight_scale_[i] * w;
    });
    if (!hits.empty()) throw DensityFloorHit(std::move(hits));
    return acc;
}

InternalSmoother full_regression(const Matrix& x, const Vector& responses, const Vector& f_at_sample,
                                 const ProductKernel& K3, double h1, double floor) {
    if (K3.dim() != x.cols()) throw InputError("K3 dimension does not match the covariates");
    return InternalSmoother(x, responses, f_at_sample, factors_of(K3), Vector::Constant(x.cols(), h1), floor);
}

InternalSmoother directional_regression(const Matrix& x, const Vector& responses, const Vector& f_at_sample,
                                        const Kernel1D& K1, const ProductKernel& K2, double h1, double h2,
                                        Index axis, double floor) {
    const Index d = x.cols();
    if (axis < 0 || axis >= d)
        throw AxisOutOfRange("axis " + std::to_string(axis) + " outside [0, " + std::to_string(d) + ")");
    if (K2.dim() != d - 1) throw InputError("K2 must act on d - 1 coordinates");
    std::vector<Kernel1D> factors;
    Vector bw(d);
    for (Index j = 0, other = 0; j < d; ++j) {
        if (j == axis) {
            factors.push_back(K1);
            bw[j] = h1;
        } else {
            factors.push_back(K2.factor(other++));
            bw[j] = h2;
        }
    }
    return InternalSmoother(x, responses, f_at_sample, std::move(factors), std::move(bw), floor);
}

double nw_full(const CensoredSample& sample, const Vector& responses, const Vector& f_at_sample,
               const ProductKernel& K3, double h1, const Eigen::Ref<const Vector>& point) {
    return full_regression(sample.x, responses, f_at_sample, K3, h1)(point);
}

double nw_directional(const CensoredSample& sample, const Vector& responses, const Vector& f_at_sample,
                      const Kernel1D& K1, const ProductKernel& K2, double h1, double h2, Index axis,
                      const Eigen::Ref<const Vector>& point) {
    return directional_regression(sample.x, responses, f_at_sample, K1, K2, h1, h2, axis)(point);
}

}  // namespace censadd
