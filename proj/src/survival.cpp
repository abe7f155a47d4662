#include "censadd/survival.hpp"

#include "censadd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <vector>

namespace censadd {

void CensoredSample::validate() const {
    if (x.rows() != z.size() || delta.size() != z.size())
        throw InputError("sample columns disagree in length: x has " + std::to_string(x.rows()) + " rows, z " +
                         std::to_string(z.size()) + ", delta " + std::to_string(delta.size()));
    if (x.cols() < 1) throw InputError("sample needs at least one covariate");
    if (!x.allFinite() || !z.allFinite()) throw InputError("sample contains non-finite entries");
    for (Index i = 0; i < z.size(); ++i) {
        if (z[i] < 0.0) throw InputError("observed time z[" + std::to_string(i) + "] is negative");
        if (delta[i] != 0 && delta[i] != 1)
            throw InputError("delta[" + std::to_string(i) + "] must be 0 or 1");
    }
}

CensoredSample CensoredSample::permuted(const Eigen::VectorXi& order) const {
    CensoredSample out{Matrix(n(), d()), Vector(n()), Eigen::VectorXi(n())};
    for (Index i = 0; i < n(); ++i) {
        out.x.row(i) = x.row(order[i]);
        out.z[i] = z[order[i]];
        out.delta[i] = delta[order[i]];
    }
    return out;
}

std::string to_string(KmCounting counting) {
    return counting == KmCounting::at_risk ? "at_risk" : "as_printed";
}

KmCounting parse_km_counting(const std::string& name) {
    if (name == "at_risk") return KmCounting::at_risk;
    if (name == "as_printed") return KmCounting::as_printed;
    throw InputError("unknown Kaplan-Meier counting '" + name + "'");
}

double StepSurvival::operator()(double y) const {
    const auto* begin = jump_times.data();
    const auto* end = begin + jump_times.size();
    const auto* it = std::upper_bound(begin, end, y);
    if (it == begin) return 1.0;
    return values[(it - begin) - 1];
}

void StepSurvival::write_csv(std::ostream& os) const {
    os << "time,value\n";
    os.precision(17);
    for (Index j = 0; j < jump_times.size(); ++j) os << jump_times[j] << ',' << values[j] << '\n';
}

StepSurvival kaplan_meier_censoring(const CensoredSample& sample, KmCounting counting) {
    const Index n = sample.n();
    std::vector<double> sorted(sample.z.data(), sample.z.data() + n);
    std::sort(sorted.begin(), sorted.end());

    std::vector<double> censored;
    for (Index i = 0; i < n; ++i)
        if (sample.delta[i] == 0) censored.push_back(sample.z[i]);
    std::sort(censored.begin(), censored.end());

    std::vector<double> times, values;
    double g = 1.0;
    for (std::size_t a = 0; a < censored.size();) {
        const double t = censored[a];
        std::size_t b = a;
        while (b < censored.size() && censored[b] == t) ++b;
        const auto ties = static_cast<double>(b - a);
        const double count =
            counting == KmCounting::at_risk
                ? static_cast<double>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), t))
                : static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
        g *= std::pow((count - 1.0) / count, ties);
        times.push_back(t);
        values.push_back(g);
        a = b;
    }
    StepSurvival out;
    out.jump_times = Eigen::Map<const Vector>(times.data(), static_cast<Index>(times.size()));
    out.values = Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
    return out;
}

Vector ipcw_responses(const CensoredSample& sample, const StepSurvival& g_n, const PsiSpec& psi) {
    Vector r = Vector::Zero(sample.n());
    for (Index i = 0; i < sample.n(); ++i) {
        if (sample.delta[i] == 0) continue;
        const double p = psi(sample.z[i]);
        if (p == 0.0) continue;
        const double g = g_n(sample.z[i]);
        if (!(g > 0.0))
            throw CensoringDegenerate(static_cast<std::size_t>(i),
                                      "G_n(Z_" + std::to_string(i) + ") = 0 for an uncensored observation with psi != 0");
        r[i] = p / g;
    }
    return r;
}

}  // namespace censadd
