#include "censadd/psi.hpp"

#include "censadd/errors.hpp"

#include <cmath>

namespace censadd {

std::string to_string(PsiForm form) {
    switch (form) {
        case PsiForm::identity_truncated: return "identity_truncated";
        case PsiForm::indicator_below: return "indicator_below";
        case PsiForm::identity: return "identity";
    }
    return "?";
}

PsiForm parse_psi_form(const std::string& name) {
    if (name == "identity_truncated") return PsiForm::identity_truncated;
    if (name == "indicator_below") return PsiForm::indicator_below;
    if (name == "identity") return PsiForm::identity;
    throw InputError("unknown psi form '" + name + "'");
}

double PsiSpec::operator()(double y) const {
    switch (form) {
        case PsiForm::identity: return scale * (y - center);
        case PsiForm::identity_truncated: return y <= *tau0 ? scale * (y - center) : 0.0;
        case PsiForm::indicator_below: return y <= *tau0 ? scale : 0.0;
    }
    return 0.0;
}

void PsiSpec::validate() const {
    if (form != PsiForm::identity && !tau0) throw InputError("psi form " + to_string(form) + " requires tau0");
    if (tau0 && !std::isfinite(*tau0)) throw InputError("tau0 must be finite");
    if (bound && !(*bound > 0.0)) throw InputError("psi bound M must be positive");
    if (!std::isfinite(scale) || !std::isfinite(center)) throw InputError("psi scale/center must be finite");
}

}  // namespace censadd
