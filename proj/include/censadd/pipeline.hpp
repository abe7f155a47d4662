#pragma once

#include "censadd/additive.hpp"
#include "censadd/kernels.hpp"
#include "censadd/plan.hpp"
#include "censadd/statistic.hpp"
#include "censadd/survival.hpp"

#include <optional>
#include <vector>

namespace censadd {

struct KernelChoice {
    KernelFamily family = KernelFamily::epanechnikov;
    std::optional<KernelFamily> test_family = KernelFamily::uniform;
    int k = 2;
    int k_prime = 6;
};

/// Everything needed to go from a censored sample to a standardized statistic.
struct PipelineConfig {
    PsiSpec psi;
    KernelChoice kernels;
    PlanConstants constants;
    std::optional<double> gamma;
    /// Bypasses the plan's n-dependent schedule.
    std::optional<Bandwidths> frozen_bandwidths;
    EvaluationRegion region{Box::cube(2, 0.0, 1.0), 0.05, Box::cube(2, 0.25, 0.75)};
    DensityShape q_shape = DensityShape::uniform;
    int q_power = 4;
    FitGridSpec fit_grid;
    OuterSpec outer;
    GridSpec bv_grid{RuleKind::midpoint, 41, false};
    GridSpec constants_grid;
    KmCounting km = KmCounting::at_risk;
    double density_floor = kDefaultDensityFloor;
    BvMode bv_mode = BvMode::plugin;
    /// Population sigma0^2 and covariate density, required in oracle mode.
    PointFunction oracle_sigma0_sq;
    PointFunction oracle_density;
    std::optional<AssumptionSpec> assumptions;
};

struct PipelineResult {
    KernelSet kernels;
    Bandwidths bandwidths;
    StepSurvival g_n;
    Vector responses;
    Vector f_at_sample;
    AdditiveFit fit;
    Vector eps;
    KernelConstants constants;
    VarianceEstimates variance;
    TestReport report;
    std::vector<Diagnostic> diagnostics;
};

/// Resolves the bandwidths the pipeline would use for a sample of size n.
Bandwidths resolve_bandwidths(const PipelineConfig& config, Index d, Index n);

PipelineResult run_pipeline(const CensoredSample& sample, const PipelineConfig& config);

}  // namespace censadd
