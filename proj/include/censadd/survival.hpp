#pragma once

#include "censadd/psi.hpp"
#include "censadd/types.hpp"

#include <iosfwd>

namespace censadd {

/// Observed triples (X_i, Z_i, delta_i); Z_i = min(Y_i, C_i), delta_i = 1{Y_i <= C_i}.
struct CensoredSample {
    Matrix x;               // n x d
    Vector z;               // n
    Eigen::VectorXi delta;  // n, entries in {0, 1}

    Index n() const { return z.size(); }
    Index d() const { return x.cols(); }
    /// Throws InputError on length mismatch, non-finite entries, negative times
    /// or indicators outside {0, 1}.
    void validate() const;
    CensoredSample permuted(const Eigen::VectorXi& order) const;
};

/// How N_n(Z_i) is counted in the product-limit factor (N_n - 1) / N_n.
///   at_risk     N_n(t) = #{j : Z_j >= t}  (product-limit estimator of G)
///   as_printed  N_n(t) = #{j : Z_j <= t}
enum class KmCounting { at_risk, as_printed };

std::string to_string(KmCounting counting);
KmCounting parse_km_counting(const std::string& name);

/// Right-continuous, non-increasing step function equal to 1 before the
/// first jump and `values[j]` on [jump_times[j], jump_times[j + 1]).
struct StepSurvival {
    Vector jump_times;
    Vector values;

    double operator()(double y) const;
    void write_csv(std::ostream& os) const;
};

/// Kaplan-Meier estimate of the censoring survival G(y) = P(C > y): every
/// censored observation contributes ((N_n(Z_i) - 1) / N_n(Z_i)) from Z_i on,
/// with 0^0 = 1 and the empty product equal to 1. Tied censored times each
/// contribute their own factor.
StepSurvival kaplan_meier_censoring(const CensoredSample& sample, KmCounting counting = KmCounting::at_risk);

/// r_i = delta_i psi(Z_i) / G_n(Z_i); zero whenever delta_i = 0 or psi(Z_i) = 0.
/// Throws CensoringDegenerate when an uncensored term with psi(Z_i) != 0 meets G_n(Z_i) = 0.
Vector ipcw_responses(const CensoredSample& sample, const StepSurvival& g_n, const PsiSpec& psi);

}  // namespace censadd
