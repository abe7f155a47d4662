#pragma once

#include "censadd/kernels.hpp"
#include "censadd/psi.hpp"
#include "censadd/survival.hpp"
#include "censadd/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace censadd {

struct Bandwidths {
    double h_n = 0.0;   // density estimate
    double h1 = 0.0;    // regression, axis of interest
    double h2 = 0.0;    // regression, remaining axes
    double ell = 0.0;   // test statistic
};

struct PlanConstants {
    double c1 = 1.0;
    double c2 = 1.0;
    double c3 = 1.0;
    /// Constant for h2; defaults to c2 so that h2 = h1.
    std::optional<double> c2_second;
};

/// Open interval (lower, upper) of admissible exponents gamma in ell_n = c3 n^-gamma.
struct ExponentBand {
    double lower = 0.0;
    double upper = 0.0;
    bool empty() const { return !(lower < upper); }
    bool contains(double g) const { return g > lower && g < upper; }
};

/// ell_n must satisfy n ell^d -> oo together with
/// n (log n / n)^{2k/(2k+1)} ell^{d/2} -> 0, i.e. gamma in (2/(d(2k+1)), 1/d).
ExponentBand feasible_band(Index d, int k);
/// Same computation with the exponent k/(2k+1) in the vanishing condition;
/// this band is empty for every k >= 1 and d >= 1.
ExponentBand printed_band(Index d, int k);

/// Power-of-n exponents of the two rate conditions at the chosen gamma
/// (log factors dropped). Divergence needs a positive exponent, vanishing a negative one.
struct RateReport {
    double diverging_exponent = 0.0;          // n ell^d ~ n^{1 - gamma d}
    double vanishing_exponent = 0.0;          // n (log n/n)^{2k/(2k+1)} ell^{d/2}
    double printed_vanishing_exponent = 0.0;  // same with k/(2k+1)
    ExponentBand band;
    ExponentBand printed;
};

class BandwidthPlan {
public:
    BandwidthPlan(Index d, int k, int k_prime, PlanConstants constants, double gamma);

    double h_n(double n) const;
    double h1(double n) const;
    double h2(double n) const;
    double ell(double n) const;
    Bandwidths at(double n) const { return {h_n(n), h1(n), h2(n), ell(n)}; }

    Index d() const { return d_; }
    int k() const { return k_; }
    int k_prime() const { return k_prime_; }
    double gamma() const { return gamma_; }
    const PlanConstants& constants() const { return constants_; }
    RateReport rates() const;

private:
    Index d_;
    int k_;
    int k_prime_;
    PlanConstants constants_;
    double gamma_;
};

/// h_n = c1 (log n/n)^{1/(2k'+d)}, h1 = c2 (log n/n)^{1/(2k+1)}, h2 likewise with
/// its own constant, ell_n = c3 n^{-gamma}. gamma defaults to the midpoint of
/// feasible_band(d, k); throws InfeasibleExponent outside that band.
BandwidthPlan make_plan(Index d, int k, int k_prime, const PlanConstants& constants = {},
                        std::optional<double> gamma = {});

enum class CensoringMode { A_i, A_ii };

std::string to_string(CensoringMode mode);

/// Which of the two censoring regimes is declared, with its parameters.
struct AssumptionSpec {
    CensoringMode mode = CensoringMode::A_i;
    std::optional<double> tau0;  // A(i)
    std::optional<double> p;     // A(ii)(a), k/(2k+1) < p <= 1/2
};

struct EvaluationRegion;

struct Diagnostic {
    std::string clause;
    std::string message;
};

/// Optional pieces of the configuration that some checks need.
struct AssumptionContext {
    const KernelSet* kernels = nullptr;
    const EvaluationRegion* region = nullptr;
    const BandwidthPlan* plan = nullptr;
};

/// Checks the data-verifiable part of the assumption set. Soft findings are
/// returned; hard failures throw AssumptionViolated naming the clause.
std::vector<Diagnostic> check_assumptions(const AssumptionSpec& spec, const CensoredSample& sample,
                                          const PsiSpec& psi, const StepSurvival& g_n,
                                          const AssumptionContext& context = {});

}  // namespace censadd
