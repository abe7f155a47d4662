#pragma once

#include "censadd/additive.hpp"
#include "censadd/kernels.hpp"
#include "censadd/quadrature.hpp"
#include "censadd/smoothing.hpp"
#include "censadd/types.hpp"

#include <functional>
#include <string>

namespace censadd {

/// eps_i = r_i - m_add(X_i).
Vector residuals(const Matrix& x, const Vector& responses, const AdditiveFit& fit);

enum class OuterIntegration {
    /// Tensor rule over g's box.
    grid,
    /// Pairwise form: the square is expanded and each pair's overlap integral
    /// is computed per axis with Gauss-Legendre on the common support, exact
    /// for polynomial kernels.
    exact,
};

std::string to_string(OuterIntegration method);
OuterIntegration parse_outer_integration(const std::string& name);

struct OuterSpec {
    OuterIntegration method = OuterIntegration::exact;
    GridSpec grid{RuleKind::gauss_legendre, 64, true};
};

/// T_n = int [ (n ell^d)^{-1} sum_i L((x - X_i)/ell) eps_i / f_n(X_i) ]^2 g(x) dx
/// with g the indicator of `g_box`. Only points whose L-window meets g enter;
/// DensityFloorHit if any of them has f_n(X_i) below the floor. In grid mode,
/// GridTooCoarse when doubling the nodes moves T_n by more than 1e-6 relative.
double test_statistic(const Matrix& x, const Vector& eps, const Vector& f_at_sample, const ProductKernel& L,
                      double ell, const Box& g_box, const OuterSpec& outer = {},
                      double floor = kDefaultDensityFloor);

/// sigma0^2(x) estimated by the full-dimensional internal smoother applied to eps_i^2.
InternalSmoother estimate_sigma0_sq(const Matrix& x, const Vector& eps, const ProductKernel& K3, double h1,
                                    const Vector& f_at_sample, double floor = kDefaultDensityFloor);

enum class BvMode { plugin, oracle };

std::string to_string(BvMode mode);
BvMode parse_bv_mode(const std::string& name);

using PointFunction = std::function<double(const Eigen::Ref<const Vector>&)>;

struct VarianceEstimates {
    Matrix grid_points;      // quadrature nodes over g's box
    Vector sigma0_sq_grid;   // sigma0^2 at those nodes
    double B_hat = 0.0;
    double V_hat = 0.0;
    BvMode mode = BvMode::plugin;
};

/// B = [int sigma0^2 / f g] int L^2 and V = 2 [int sigma0^4 / f^2 g^2] int (L*L)^2
/// by quadrature over g's box. Throws DensityFloorHit when f drops below the
/// floor at a node and NonpositiveVariance when V <= 0.
VarianceEstimates plugin_B_V(const PointFunction& sigma0_sq, const PointFunction& f, const Box& g_box,
                             const KernelConstants& constants, const GridSpec& grid = {RuleKind::midpoint, 41, false},
                             BvMode mode = BvMode::plugin, double floor = kDefaultDensityFloor);

struct TestReport {
    double t_n_star = 0.0;
    double ell_n = 0.0;
    Index n = 0;
    Index d = 0;
    double B_hat = 0.0;
    double V_hat = 0.0;
    double z = 0.0;
    double p_value = 1.0;
};

/// z = (n ell^{d/2} T - B ell^{-d/2}) / sqrt(V), p = P(N(0,1) > z).
TestReport standardize(double t_n_star, double B_hat, double V_hat, Index n, Index d, double ell_n);

double upper_tail_normal(double z);
double normal_cdf(double z);

}  // namespace censadd
