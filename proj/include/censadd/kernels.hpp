#pragma once

#include "censadd/quadrature.hpp"
#include "censadd/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace censadd {

/// Base shapes on the canonical support [-1, 1]; rescaled to the kernel's radius.
enum class KernelFamily { uniform, epanechnikov, quartic };

/// `order_k_polynomial` marks a base shape multiplied by an even polynomial
/// to cancel moments 2, 4, ..., order - 2.
enum class KernelName { uniform, epanechnikov, quartic, order_k_polynomial };

std::string to_string(KernelFamily family);
std::string to_string(KernelName name);
KernelFamily parse_kernel_family(const std::string& name);

/// Parsed form of strings such as "epanechnikov:k=2" or "quartic".
struct KernelSpec {
    KernelFamily family = KernelFamily::epanechnikov;
    std::optional<int> order;
};

KernelSpec parse_kernel_spec(const std::string& text);

/// Compactly supported, symmetric polynomial kernel on [-radius, radius].
///
/// Values are `p(u / radius) / radius` where `p` is a polynomial on [-1, 1]
/// (coefficients in increasing degree). Zero outside the closed support.
class Kernel1D {
public:
    /// Order-2 base shapes have order 2; any larger even order is built by the
    /// polynomial-multiplier method. Default radius: 1/2 for uniform, 1 otherwise.
    static Kernel1D make(KernelFamily family, int order = 2, std::optional<double> radius = {});

    template <typename Scalar>
    Scalar operator()(Scalar u) const {
        const Scalar s = u / Scalar(radius_);
        if (s < Scalar(-1) || s > Scalar(1)) return Scalar(0);
        Scalar acc(0);
        for (Index j = coeffs_.size() - 1; j >= 0; --j) acc = acc * s + Scalar(coeffs_[j]);
        return acc / Scalar(radius_);
    }

    KernelName name() const { return order_ > 2 ? KernelName::order_k_polynomial : static_cast<KernelName>(family_); }
    KernelFamily family() const { return family_; }
    int order() const { return order_; }
    double support_radius() const { return radius_; }
    /// Continuous on the real line (uniform-based shapes jump at the edges).
    bool lipschitz() const { return family_ != KernelFamily::uniform; }
    const Vector& coefficients() const { return coeffs_; }
    std::string describe() const;

private:
    KernelFamily family_ = KernelFamily::epanechnikov;
    int order_ = 2;
    double radius_ = 1.0;
    Vector coeffs_;
};

/// Tensor product of one-dimensional factors; the empty product is identically 1.
class ProductKernel {
public:
    ProductKernel() = default;
    ProductKernel(const Kernel1D& factor, Index d) : factors_(static_cast<std::size_t>(d), factor) {}

    Index dim() const { return static_cast<Index>(factors_.size()); }
    const Kernel1D& factor(Index j) const { return factors_[static_cast<std::size_t>(j)]; }
    int order() const { return factors_.empty() ? 0 : factors_.front().order(); }
    double support_radius() const { return factors_.empty() ? 0.0 : factors_.front().support_radius(); }

    template <class Derived>
    double operator()(const Eigen::MatrixBase<Derived>& u) const {
        double acc = 1.0;
        for (Index j = 0; j < dim(); ++j) {
            acc *= factors_[static_cast<std::size_t>(j)](static_cast<double>(u[j]));
            if (acc == 0.0) break;
        }
        return acc;
    }

    /// K((x - c) / h) without forming the scaled difference vector.
    template <class DX, class DC>
    double scaled(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DC>& c, double h) const {
        double acc = 1.0;
        for (Index j = 0; j < dim(); ++j) {
            acc *= factors_[static_cast<std::size_t>(j)]((static_cast<double>(x[j]) - static_cast<double>(c[j])) / h);
            if (acc == 0.0) break;
        }
        return acc;
    }

private:
    std::vector<Kernel1D> factors_;
};

/// The five kernels of the estimation pipeline.
///   L  - test-statistic kernel on R^d
///   K  - density kernel on R^d, order k'
///   K1 - directional kernel on the axis of interest, order k
///   K2 - directional kernel on the remaining d - 1 axes
///   K3 - full-dimensional regression kernel, order k
struct KernelSet {
    Index d = 1;
    int k = 2;
    int k_prime = 4;
    ProductKernel L;
    ProductKernel K;
    Kernel1D K1;
    ProductKernel K2;
    ProductKernel K3;
};

/// `test_family` selects the base shape of L (defaults to `family`).
KernelSet make_kernel_set(Index d, int k, int k_prime, KernelFamily family,
                          std::optional<KernelFamily> test_family = {});

struct KernelConstants {
    double l2_norm_sq = 0.0;        // int L(t)^2 dt
    double conv_sq_integral = 0.0;  // int [int L(t) L(t - r) dt]^2 dr
};

/// Throws GridTooCoarse when doubling the resolution moves either constant
/// by more than 1e-6 relative.
KernelConstants kernel_constants(const Kernel1D& L, const GridSpec& grid = {});
KernelConstants kernel_constants(const ProductKernel& L, const GridSpec& grid = {});

}  // namespace censadd
