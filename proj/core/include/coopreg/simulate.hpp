#pragma once

#include <coopreg/groups.hpp>
#include <coopreg/model_select.hpp>
#include <coopreg/solver.hpp>
#include <coopreg/types.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace coopreg {

/**
 * Synthetic wave scenario: K groups of equal size, a quadratic wave of
 * half-width h inside each active group, AR(1) covariates and Gaussian noise
 * scaled to a target population R^2.
 */
struct WaveScenario
{
    Index num_groups = 10;
    Index group_size = 9;
    /// Wave width; h = 3, 4, 5 gives 5, 7, 9 nonzeros per active group.
    int h = 5;
    Index active_groups = 3;
    double rho = 0.4;
    Index n = 180;
    double target_r2 = 0.75;
    double noise_sd = 1.0;
    /// Fraction of nonzero coefficients whose sign (and covariate) is flipped.
    double sign_flip = 0.0;
    std::uint64_t seed = 1;

    Index p() const noexcept { return num_groups * group_size; }
    /// Nonzeros per active group for a group of size 9.
    Index support_size() const;
    std::string label() const;
    void validate() const;
};

/// h from the per-group support size: 5 -> 3, 7 -> 4, 9 -> 5.
int wave_width_for_support(Index support_size);

/// ((h - |c - j|)_+)^2 / h^2 over j = 1..size with center c = (size + 1) / 2.
Vector wave_pattern(int h, Index size = 9);

/// Psi_jj' = rho^|j - j'|.
Matrix ar1_covariance(Index p, double rho);

struct SimulatedData
{
    Matrix X;
    Vector y;
    Vector beta_star;
    GroupPartition partition;
    std::vector<Index> active_groups;
    std::vector<Index> flipped;
};

SimulatedData generate(const WaveScenario& scenario);

struct MetricsRow
{
    std::string method;
    std::string scenario;
    double rmse = 0.0;
    double sign_error = 0.0;
    double recall = 0.0;
    double precision = 0.0;
};

/// RMSE over all coefficients, sign mismatch fraction, support recall and precision.
MetricsRow evaluate(const VectorRef& beta_hat, const VectorRef& beta_star);

enum class Method { lasso, group, sgl_cv, sgl_1se, coop };

std::string_view to_string(Method m) noexcept;
Method parse_method(std::string_view name);
std::vector<Method> all_methods();

struct BenchmarkOptions
{
    Index replicates = 100;
    std::uint64_t seed = 1;
    int jobs = 1;
    Index n_lambda = 100;
    Index cv_folds = 5;
    double sgl_alpha = 0.5;
    SolverOptions solver;
};

struct MetricSummary
{
    double mean = 0.0;
    double se = 0.0;
};

struct BenchmarkCell
{
    std::string scenario;
    Method method = Method::coop;
    Index replicates = 0;
    MetricSummary rmse;
    MetricSummary sign_error;
    MetricSummary recall;
    MetricSummary precision;
};

/// Fits one replicate with every requested method; returns one row per method.
std::vector<MetricsRow> run_replicate(const WaveScenario& scenario, const std::vector<Method>& methods,
                                      const BenchmarkOptions& options);

/**
 * Mean and standard error of each metric over replicates, per scenario and
 * method. Lasso, group and coop choose lambda by BIC with the known noise
 * variance; the sparse group-Lasso by 5-fold CV (minimum or 1-SE rule).
 * Replicate r of scenario s uses a seed derived from (seed, s, r), so the
 * result does not depend on `jobs`.
 */
std::vector<BenchmarkCell> run_benchmark(const std::vector<WaveScenario>& scenarios,
                                         const std::vector<Method>& methods, const BenchmarkOptions& options);

/// Long format: scenario,method,metric,mean,se (RMSE scaled by 1e3, sign error in %).
std::string benchmark_csv(const std::vector<BenchmarkCell>& cells);

} // namespace coopreg
