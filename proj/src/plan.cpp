#include "censadd/plan.hpp"

#include "censadd/additive.hpp"
#include "censadd/errors.hpp"

#include <cmath>
#include <sstream>

namespace censadd {

namespace {

double log_ratio(double n) { return std::log(n) / n; }

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

ExponentBand feasible_band(Index d, int k) {
    const double dd = static_cast<double>(d);
    return {2.0 / (dd * (2.0 * k + 1.0)), 1.0 / dd};
}

ExponentBand printed_band(Index d, int k) {
    const double dd = static_cast<double>(d);
    return {2.0 * (k + 1.0) / (dd * (2.0 * k + 1.0)), 1.0 / dd};
}

BandwidthPlan::BandwidthPlan(Index d, int k, int k_prime, PlanConstants constants, double gamma)
    : d_(d), k_(k), k_prime_(k_prime), constants_(constants), gamma_(gamma) {}

double BandwidthPlan::h_n(double n) const {
    return constants_.c1 * std::pow(log_ratio(n), 1.0 / (2.0 * k_prime_ + static_cast<double>(d_)));
}

double BandwidthPlan::h1(double n) const { return constants_.c2 * std::pow(log_ratio(n), 1.0 / (2.0 * k_ + 1.0)); }

double BandwidthPlan::h2(double n) const {
    return constants_.c2_second.value_or(constants_.c2) * std::pow(log_ratio(n), 1.0 / (2.0 * k_ + 1.0));
}

double BandwidthPlan::ell(double n) const { return constants_.c3 * std::pow(n, -gamma_); }

RateReport BandwidthPlan::rates() const {
    const double dd = static_cast<double>(d_);
    RateReport r;
    r.diverging_exponent = 1.0 - gamma_ * dd;
    r.vanishing_exponent = 1.0 - 2.0 * k_ / (2.0 * k_ + 1.0) - gamma_ * dd / 2.0;
    r.printed_vanishing_exponent = 1.0 - k_ / (2.0 * k_ + 1.0) - gamma_ * dd / 2.0;
    r.band = feasible_band(d_, k_);
    r.printed = printed_band(d_, k_);
    return r;
}

BandwidthPlan make_plan(Index d, int k, int k_prime, const PlanConstants& constants, std::optional<double> gamma) {
    if (d < 1) throw InputError("dimension must be at least 1");
    if (k < 1) throw OrderInfeasible("k must be at least 1");
    if (k_prime <= k * d) throw OrderInfeasible("k' must exceed k*d");
    if (!(constants.c1 > 0.0) || !(constants.c2 > 0.0) || !(constants.c3 > 0.0) ||
        (constants.c2_second && !(*constants.c2_second > 0.0)))
        throw InputError("bandwidth constants must be positive");
    const ExponentBand band = feasible_band(d, k);
    const double g = gamma.value_or(0.5 * (band.lower + band.upper));
    if (!band.contains(g))
        throw InfeasibleExponent("gamma = " + fmt(g) + " outside the feasible band (" + fmt(band.lower) + ", " +
                                 fmt(band.upper) + ")");
    return BandwidthPlan(d, k, k_prime, constants, g);
}

std::string to_string(CensoringMode mode) { return mode == CensoringMode::A_i ? "A_i" : "A_ii"; }

std::vector<Diagnostic> check_assumptions(const AssumptionSpec& spec, const CensoredSample& sample,
                                          const PsiSpec& psi, const StepSurvival& g_n,
                                          const AssumptionContext& context) {
    std::vector<Diagnostic> out;

    // Boundedness of psi on the observed range.
    if (psi.bound) {
        for (Index i = 0; i < sample.n(); ++i)
            if (std::abs(psi(sample.z[i])) > *psi.bound)
                throw AssumptionViolated("C.3", "|psi(Z_" + std::to_string(i) + ")| exceeds the bound M = " + fmt(*psi.bound));
    }

    if (spec.mode == CensoringMode::A_i) {
        const auto tau0 = spec.tau0 ? spec.tau0 : psi.tau0;
        if (!psi.vanishes_beyond_tau0() || !tau0)
            throw AssumptionViolated("A(i)", "A(i) requires psi=0 beyond tau0");
        if (psi.tau0 && spec.tau0 && *psi.tau0 > *spec.tau0)
            throw AssumptionViolated("A(i)", "psi is truncated at " + fmt(*psi.tau0) + ", beyond the declared tau0");
        if (!(g_n(*tau0) > 0.0)) throw AssumptionViolated("A(i)", "censoring exhausts mass before tau0");
        if (*tau0 >= sample.z.maxCoeff())
            out.push_back({"A(i)", "tau0 = " + fmt(*tau0) + " is not below the largest observed time"});
    } else {
        const double lower = context.kernels ? context.kernels->k / (2.0 * context.kernels->k + 1.0) : 0.0;
        if (!spec.p || !(*spec.p > lower) || !(*spec.p <= 0.5))
            throw AssumptionViolated("A(ii)(a)", "p must lie in (k/(2k+1), 1/2]");
        // Tail-regime bandwidth coupling: h ~ n^{-1/(2k+1)} gives n^{2p-1} h^{-1} |log h| ~ n^{2p-1+1/(2k+1)} log n;
        // both h1 and h2 follow that rate here.
        if (context.plan) {
            const int k = context.plan->k();
            const double exponent = 2.0 * *spec.p - 1.0 + 1.0 / (2.0 * k + 1.0);
            if (exponent < 0.0)
                throw AssumptionViolated("A(ii)(c)", "n^{2p-1} h_{l,n}^{-1} |log h_{l,n}| does not diverge for h1 or h2");
            const double n = static_cast<double>(sample.n());
            for (const auto& [name, h] : {std::pair{"h1", context.plan->h1(n)}, std::pair{"h2", context.plan->h2(n)}}) {
                const double value = std::pow(n, 2.0 * *spec.p - 1.0) / h * std::abs(std::log(h));
                if (value < 1.0)
                    out.push_back({"A(ii)(c)", std::string("n^{2p-1} ") + name + "^{-1}|log " + name + "| = " + fmt(value) +
                                               " at the current n"});
            }
        }
    }

    if (context.region) {
        const EvaluationRegion& region = *context.region;
        if (!region.g.strictly_inside(region.domain))
            throw AssumptionViolated("G.1", "support of g " + region.g.to_string() + " is not inside C " +
                                                region.domain.to_string());
    }

    if (context.kernels) {
        const KernelSet& ks = *context.kernels;
        if (ks.K1.order() != ks.k || ks.K3.order() != ks.k)
            throw AssumptionViolated("K.2", "K1 and K3 must have order k = " + std::to_string(ks.k));
        if (ks.K.order() != ks.k_prime || ks.k_prime <= ks.k * ks.d)
            throw AssumptionViolated("K.2", "K must have order k' > k d");
        if (!ks.K1.lipschitz()) out.push_back({"K.1", "K1 (" + ks.K1.describe() + ") is not Lipschitz"});
    }
    return out;
}

}  // namespace censadd
