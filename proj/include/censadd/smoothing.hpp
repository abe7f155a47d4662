#pragma once

#include "censadd/kernels.hpp"
#include "censadd/survival.hpp"
#include "censadd/types.hpp"

#include <algorithm>
#include <vector>

namespace censadd {

inline constexpr double kDefaultDensityFloor = 1e-12;

/// Sum over sample points of a coefficient times an anisotropic product
/// kernel, sum_i c_i prod_j k_j((x_j - X_ij) / h_j). Candidate points are
/// found through a sort on axis 0, so only the window around x is visited.
class WindowedKernelSum {
public:
    WindowedKernelSum() = default;
    WindowedKernelSum(const Matrix& x, std::vector<Kernel1D> factors, Vector bandwidths);

    Index size() const { return points_.cols(); }
    Index dim() const { return points_.rows(); }

    /// Calls f(i, weight) for every sample point with a nonzero kernel weight at x.
    template <class F>
    void for_each_neighbor(const Eigen::Ref<const Vector>& x, F&& f) const {
        const double lo = x[0] - reach_[0];
        const double hi = x[0] + reach_[0];
        auto first = std::lower_bound(sorted_axis0_.begin(), sorted_axis0_.end(), lo);
        for (auto it = first; it != sorted_axis0_.end() && *it <= hi; ++it) {
            const Index i = order_[static_cast<std::size_t>(it - sorted_axis0_.begin())];
            double w = 1.0;
            for (Index j = 0; j < dim() && w != 0.0; ++j)
                w *= factors_[static_cast<std::size_t>(j)]((x[j] - points_(j, i)) / bandwidths_[j]);
            if (w != 0.0) f(i, w);
        }
    }

    double kernel_weight(Index i, const Eigen::Ref<const Vector>& x) const;

private:
    Matrix points_;  // d x n, one column per sample point
    std::vector<Kernel1D> factors_;
    Vector bandwidths_;
    Vector reach_;  // support radius times bandwidth, per axis
    std::vector<double> sorted_axis0_;
    std::vector<Index> order_;
};

/// f_n(x) = (n h^d)^{-1} sum_j K((X_j - x) / h).
class DensityEstimate {
public:
    DensityEstimate(const Matrix& x, const ProductKernel& K, double h);

    double operator()(const Eigen::Ref<const Vector>& point) const;
    /// f_n at every sample point, in sample order.
    Vector at_sample() const;
    Vector evaluate(const Matrix& points) const;

    double bandwidth() const { return h_; }
    const ProductKernel& kernel() const { return kernel_; }
    /// Higher-order kernels take negative values, so the estimate may too.
    bool may_be_negative() const { return kernel_.order() > 2; }

private:
    Matrix x_;
    ProductKernel kernel_;
    double h_;
    double scale_;
    WindowedKernelSum sum_;
};

DensityEstimate density_estimate(const CensoredSample& sample, const ProductKernel& K, double h);

/// Internal Nadaraya-Watson smoother sum_i W_i(x) r_i where every weight is
/// divided by the density estimate at its own sample point. Both regression
/// estimators are instances with different kernels and bandwidths; the
/// per-point quotients r_i / f_n(X_i) are computed once at construction.
class InternalSmoother {
public:
    InternalSmoother(const Matrix& x, const Vector& responses, const Vector& f_at_sample,
                     std::vector<Kernel1D> factors, Vector bandwidths, double floor = kDefaultDensityFloor);

    /// Throws DensityFloorHit when a point whose f_n(X_i) is below the floor
    /// carries a nonzero weight at x.
    double operator()(const Eigen::Ref<const Vector>& point) const;
    Vector evaluate(const Matrix& points) const;

    /// W_{n,i}(x).
    double weight(Index i, const Eigen::Ref<const Vector>& point) const;
    /// sum_i W_{n,i}(x).
    double weight_sum(const Eigen::Ref<const Vector>& point) const;

    Index size() const { return sum_.size(); }
    Index dim() const { return sum_.dim(); }

private:
    WindowedKernelSum sum_;
    Vector f_at_sample_;
    Vector weight_scale_;  // 1 / (n prod_j h_j f_n(X_i)), 0 below the floor
    Vector coeffs_;        // r_i * weight_scale_i
    std::vector<char> below_floor_;
    double floor_;
};

/// Full-dimensional estimator: W_{n,i}(x) = K3((x - X_i)/h1) / (n h1^d f_n(X_i)).
InternalSmoother full_regression(const Matrix& x, const Vector& responses, const Vector& f_at_sample,
                                 const ProductKernel& K3, double h1, double floor = kDefaultDensityFloor);

/// Directional estimator for axis `axis` (0-based): K1 on that coordinate at h1,
/// K2 on the other d - 1 coordinates at h2, normalised by n h1 h2^{d-1} f_n(X_i).
InternalSmoother directional_regression(const Matrix& x, const Vector& responses, const Vector& f_at_sample,
                                        const Kernel1D& K1, const ProductKernel& K2, double h1, double h2,
                                        Index axis, double floor = kDefaultDensityFloor);

double nw_full(const CensoredSample& sample, const Vector& responses, const Vector& f_at_sample,
               const ProductKernel& K3, double h1, const Eigen::Ref<const Vector>& point);

double nw_directional(const CensoredSample& sample, const Vector& responses, const Vector& f_at_sample,
                      const Kernel1D& K1, const ProductKernel& K2, double h1, double h2, Index axis,
                      const Eigen::Ref<const Vector>& point);

}  // namespace censadd
