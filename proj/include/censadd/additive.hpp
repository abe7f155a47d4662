#pragma once

#include "censadd/kernels.hpp"
#include "censadd/plan.hpp"
#include "censadd/quadrature.hpp"
#include "censadd/smoothing.hpp"
#include "censadd/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace censadd {

enum class DensityShape { uniform, bump };

std::string to_string(DensityShape shape);
DensityShape parse_density_shape(const std::string& name);

/// Integration density q_l on a compact interval. `bump` is proportional to
/// (1 - s^2)^power on the rescaled interval s in [-1, 1], which has power - 1
/// continuous derivatives on the real line.
class IntervalDensity {
public:
    IntervalDensity(DensityShape shape, double lower, double upper, int power = 4);

    double operator()(double u) const;
    double lower() const { return lower_; }
    double upper() const { return upper_; }
    DensityShape shape() const { return shape_; }
    int power() const { return power_; }
    double sup() const;
    double sample(std::mt19937_64& rng) const;

private:
    DensityShape shape_;
    double lower_;
    double upper_;
    int power_;
    double norm_;
};

/// q = prod_l q_l and its leave-one-out products q_{-l}.
struct IntegrationDensities {
    std::vector<IntervalDensity> factors;

    Index dim() const { return static_cast<Index>(factors.size()); }
    double q(const Eigen::Ref<const Vector>& x) const;
    /// q_{-l} evaluated at the full point x (coordinate l ignored).
    double q_without(Index l, const Eigen::Ref<const Vector>& x) const;
    Box support() const;

    static IntegrationDensities on_box(const Box& box, DensityShape shape = DensityShape::uniform, int power = 4);
};

/// Compact box C, margin alpha, and the sub-box where the weight g equals 1.
struct EvaluationRegion {
    Box domain;
    double alpha = 0.05;
    Box g;

    /// Throws InputError unless g lies strictly inside the domain.
    void validate() const;
};

/// Piecewise-linear curve on a strictly increasing grid; constant beyond its ends.
struct ComponentCurve {
    Index axis = 0;
    Vector grid;
    Vector values;

    double operator()(double u) const;
    /// sum_g w_g q_l(u_g) eta(u_g) / sum_g w_g q_l(u_g) with trapezoid weights on the grid.
    double centered_integral(const IntervalDensity& q_l) const;
    void write_csv(std::ostream& os) const;
};

/// mu_hat + sum_l eta_l(x_l).
struct AdditiveFit {
    double mu_hat = 0.0;
    std::vector<ComponentCurve> components;

    double operator()(const Eigen::Ref<const Vector>& x) const;
    Vector evaluate(const Matrix& points) const;
    Index dim() const { return static_cast<Index>(components.size()); }
};

/// Resolution of the marginal integration.
struct FitGridSpec {
    int curve_points = 101;
    /// Inner rule over the integration box; Monte Carlo above mc_above_dim.
    GridSpec inner{RuleKind::midpoint, 41, true};
    Index mc_above_dim = 3;
    int mc_points = 4096;
    std::uint64_t mc_seed = 0x5eed5eedULL;
    double refinement_tol = 1e-3;

    FitGridSpec refined() const;
};

/// eta_l(u) = int m_l(u, x_{-l}) q_{-l}(x_{-l}) dx_{-l} - int m_l(x) q(x) dx.
///
/// The first term is evaluated on `curve_points` equispaced abscissae spanning
/// q_l's support with the inner rule on the remaining axes; the second is the
/// q_l-weighted trapezoid average of the first over the same abscissae, so the
/// curve is centred exactly under that rule. Both quadratures are self-normalised.
/// Throws GridTooCoarse when doubling the resolution moves any curve value by
/// more than refinement_tol (skipped for the Monte Carlo route).
ComponentCurve estimate_component(Index l, const InternalSmoother& directional, const IntegrationDensities& densities,
                                  const FitGridSpec& grid = {});

/// int m(x) q(x) dx for the full-dimensional estimator.
double integrate_against_q(const InternalSmoother& full, const IntegrationDensities& densities,
                           const FitGridSpec& grid = {});

/// Marginal-integration additive fit from precomputed IPCW responses and
/// density values at the sample points.
AdditiveFit additive_fit(const Matrix& x, const Vector& responses, const Vector& f_at_sample,
                         const KernelSet& kernels, const Bandwidths& bandwidths,
                         const IntegrationDensities& densities, const FitGridSpec& grid = {},
                         double floor = kDefaultDensityFloor);

/// Same starting from the raw sample: Kaplan-Meier weights, IPCW responses and
/// the density estimate are computed first.
AdditiveFit additive_fit(const CensoredSample& sample, const PsiSpec& psi, const KernelSet& kernels,
                         const Bandwidths& bandwidths, const IntegrationDensities& densities,
                         const FitGridSpec& grid = {}, KmCounting counting = KmCounting::at_risk);

}  // namespace censadd
