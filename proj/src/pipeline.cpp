#include "censadd/pipeline.hpp"

#include "censadd/errors.hpp"

namespace censadd {

Bandwidths resolve_bandwidths(const PipelineConfig& config, Index d, Index n) {
    if (config.frozen_bandwidths) return *config.frozen_bandwidths;
    const BandwidthPlan plan = make_plan(d, config.kernels.k, config.kernels.k_prime, config.constants, config.gamma);
    return plan.at(static_cast<double>(n));
}

PipelineResult run_pipeline(const CensoredSample& sample, const PipelineConfig& config) {
    sample.validate();
    config.psi.validate();
    config.region.validate();
    const Index d = sample.d();
    const Index n = sample.n();
    if (config.region.domain.dim() != d) throw InputError("region dimension does not match the sample");

    PipelineResult out;
    out.kernels = make_kernel_set(d, config.kernels.k, config.kernels.k_prime, config.kernels.family,
                                  config.kernels.test_family);
    const BandwidthPlan plan = make_plan(d, config.kernels.k, config.kernels.k_prime, config.constants, config.gamma);
    out.bandwidths = config.frozen_bandwidths.value_or(plan.at(static_cast<double>(n)));

    out.g_n = kaplan_meier_censoring(sample, config.km);
    if (config.assumptions) {
        AssumptionContext ctx{&out.kernels, &config.region, &plan};
        out.diagnostics = check_assumptions(*config.assumptions, sample, config.psi, out.g_n, ctx);
    }
    if (config.q_shape == DensityShape::uniform)
        out.diagnostics.push_back({"Q.2", "uniform q_l is not smooth at the ends of its support"});
    for (Index k = 0; k < d; ++k) {
        const double reach = out.kernels.L.factor(k).support_radius() * out.bandwidths.ell;
        if (config.region.g.lo[k] - reach < config.region.domain.lo[k] ||
            config.region.g.hi[k] + reach > config.region.domain.hi[k]) {
            out.diagnostics.push_back({"G.1", "L-windows around g reach outside C on axis " + std::to_string(k + 1) +
                                                  "; residuals there use extrapolated components"});
            break;
        }
    }

    out.responses = ipcw_responses(sample, out.g_n, config.psi);
    const DensityEstimate f_hat = density_estimate(sample, out.kernels.K, out.bandwidths.h_n);
    out.f_at_sample = f_hat.at_sample();

    const IntegrationDensities q = IntegrationDensities::on_box(config.region.domain, config.q_shape, config.q_power);
    out.fit = additive_fit(sample.x, out.responses, out.f_at_sample, out.kernels, out.bandwidths, q, config.fit_grid,
                           config.density_floor);
    out.eps = residuals(sample.x, out.responses, out.fit);

    const double t = test_statistic(sample.x, out.eps, out.f_at_sample, out.kernels.L, out.bandwidths.ell,
                                    config.region.g, config.outer, config.density_floor);
    out.constants = kernel_constants(out.kernels.L, config.constants_grid);

    if (config.bv_mode == BvMode::oracle) {
        if (!config.oracle_sigma0_sq || !config.oracle_density)
            throw InputError("oracle B/V mode needs the population sigma0^2 and density");
        out.variance = plugin_B_V(config.oracle_sigma0_sq, config.oracle_density, config.region.g, out.constants,
                                  config.bv_grid, BvMode::oracle, config.density_floor);
    } else {
        const InternalSmoother sigma = estimate_sigma0_sq(sample.x, out.eps, out.kernels.K3, out.bandwidths.h1,
                                                          out.f_at_sample, config.density_floor);
        out.variance = plugin_B_V([&](const Eigen::Ref<const Vector>& p) { return sigma(p); },
                                  [&](const Eigen::Ref<const Vector>& p) { return f_hat(p); }, config.region.g,
                                  out.constants, config.bv_grid, BvMode::plugin, config.density_floor);
    }
    out.report = standardize(t, out.variance.B_hat, out.variance.V_hat, n, d, out.bandwidths.ell);
    return out;
}

}  // namespace censadd
