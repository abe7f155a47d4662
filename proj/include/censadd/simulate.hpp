#pragma once

#include "censadd/pipeline.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace censadd {

/// Additive component shapes on the rescaled coordinate u in [0, 1]; each has
/// mean zero under the uniform law.
enum class ComponentKind { zero, linear, sine };
/// Interaction on the first two axes. Both integrate to zero in either
/// coordinate over any interval symmetric about u = 1/2, so the additive part
/// of the truth is unchanged; both have sup 1/4.
///   bilinear      (u1 - 1/2)(u2 - 1/2)
///   sine_product  sin(2 pi u1) sin(2 pi u2) / 4
enum class InteractionKind { none, bilinear, sine_product };

std::string to_string(ComponentKind kind);
ComponentKind parse_component_kind(const std::string& name);
std::string to_string(InteractionKind kind);
InteractionKind parse_interaction_kind(const std::string& name);

/// Simulation truth: X uniform on [lo, hi]^d,
/// Y = mu + sum_l m_l(X_l) + theta * interaction(X) + e with e a centred normal
/// truncated at +-truncation * sd, and C ~ Exponential(rate) independent of
/// (X, Y) (rate 0 means no censoring).
struct TrueModel {
    Index d = 2;
    double mu = 3.0;
    std::vector<ComponentKind> components{ComponentKind::linear, ComponentKind::sine};
    InteractionKind interaction = InteractionKind::bilinear;
    double theta = 0.0;
    double noise_sd = 0.5;
    double noise_truncation = 3.0;
    double covariate_lo = 0.0;
    double covariate_hi = 1.0;
    double censoring_rate = 0.0;

    /// Throws InputError on inconsistent fields or when Y can be negative.
    void validate() const;

    double component(Index l, double x) const;
    double interaction_term(const Eigen::Ref<const Vector>& x) const;
    /// E[Y | X = x].
    double regression(const Eigen::Ref<const Vector>& x) const;
    double density(const Eigen::Ref<const Vector>& x) const;
    Box covariate_box() const { return Box::cube(d, covariate_lo, covariate_hi); }
    /// G(t) = P(C > t).
    double censoring_survival(double t) const;
    double noise_density(double e) const;
    double noise_variance() const;
    /// Bounds of the support of Y.
    double y_lower() const;
    double y_upper() const;

    /// m_psi(x) = E[psi(Y) | X = x].
    double psi_regression(const Eigen::Ref<const Vector>& x, const PsiSpec& psi) const;
    /// Conditional variance of the IPCW response, E[psi(Y)^2 / G(Y) | x] - m_psi(x)^2.
    double sigma0_sq(const Eigen::Ref<const Vector>& x, const PsiSpec& psi) const;
    /// P(delta = 1) = E G(Y).
    double uncensored_probability() const;
    /// P(Z > t).
    double observed_survival(double t) const;
    /// Population p-quantile of Z.
    double observed_quantile(double p) const;
    /// E m_l(X_l) under the covariate law.
    double component_mean(Index l) const;
};

/// Exponential rate giving the requested fraction of censored observations.
double calibrate_censoring_rate(TrueModel model, double censored_fraction);

/// Default null model: d = 2, X uniform on [0, 1]^2, m_1(x) = x - 1/2,
/// m_2(x) = sin(2 pi x)/2, noise sd 0.5 truncated at 3 sd, about 30% censoring.
/// theta scales the given interaction.
TrueModel default_model(double theta = 0.0, InteractionKind interaction = InteractionKind::sine_product);

CensoredSample draw_sample(const TrueModel& model, Index n, std::uint64_t seed);

/// Seed of replicate r, a pure function of (master, r).
std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t r);

struct SimulationConfig {
    TrueModel model = default_model();
    Index n = 400;
    int replications = 200;
    std::uint64_t seed = 20240601;
    /// Worker cap; 0 uses the hardware concurrency.
    int threads = 0;
    PipelineConfig pipeline;
    /// Points per axis of the grid over g on which the sup-error of the fit is taken.
    int sup_error_points = 21;
    /// Fraction of failed replicates tolerated before aborting.
    double max_failure_fraction = 0.05;

    void validate() const;
};

/// Default study: default_model(), psi(y) = y - mu truncated at the top of
/// Y's support, interior evaluation region and oracle B/V.
SimulationConfig default_simulation(double theta = 0.0);

/// Fills in the oracle sigma0^2 and density from the model.
PipelineConfig attach_oracle(PipelineConfig pipeline, const TrueModel& model);

struct ReplicateRow {
    int replicate = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string failure;
    double t_n_star = 0.0;
    double B_hat = 0.0;
    double V_hat = 0.0;
    double z = 0.0;
    double p_value = 0.0;
    /// sup over g of |m_add_hat - m_psi|.
    double sup_error = 0.0;
};

struct MonteCarloSummary {
    int replications = 0;
    int failures = 0;
    double mean_z = 0.0;
    double var_z = 0.0;
    double rejection_rate = 0.0;
    double ks_distance = 0.0;
    double mean_t_n_star = 0.0;
    double mean_sup_error = 0.0;
};

struct MonteCarloResult {
    std::vector<ReplicateRow> rows;
    MonteCarloSummary summary;
};

/// Summary over the successful rows; rejection at p < level.
MonteCarloSummary summarize(const std::vector<ReplicateRow>& rows, double level = 0.05);

/// Kolmogorov-Smirnov distance between the empirical law of `sample` and N(0, 1).
double ks_distance_normal(std::vector<double> sample);

/// One replicate: draw, run the pipeline, measure the fit's sup-error.
ReplicateRow run_replicate(const SimulationConfig& config, int replicate);

/// Runs the replicates in parallel. Failures (numeric or assumption errors)
/// are recorded in their rows; throws Error if more than
/// max_failure_fraction of them fail.
MonteCarloResult run_monte_carlo(const SimulationConfig& config);

void write_rows_csv(std::ostream& os, const std::vector<ReplicateRow>& rows);

}  // namespace censadd
