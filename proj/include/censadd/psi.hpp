#pragma once

#include <optional>
#include <string>

namespace censadd {

enum class PsiForm { identity_truncated, indicator_below, identity };

std::string to_string(PsiForm form);
PsiForm parse_psi_form(const std::string& name);

/// Transformation psi applied to the response before regression:
///   identity_truncated  scale * (y - center) * 1{y <= tau0}
///   indicator_below     scale * 1{y <= tau0}
///   identity            scale * (y - center)
struct PsiSpec {
    PsiForm form = PsiForm::identity;
    std::optional<double> tau0;
    std::optional<double> bound;  // M with sup |psi| <= M on the observed range
    double scale = 1.0;
    double center = 0.0;

    double operator()(double y) const;
    /// Throws InputError when a truncated form lacks tau0 or values are not finite.
    void validate() const;
    /// psi vanishes on (tau0, infinity).
    bool vanishes_beyond_tau0() const { return form != PsiForm::identity && tau0.has_value(); }
};

}  // namespace censadd
