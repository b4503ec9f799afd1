#pragma once

#include <coopreg/glm.hpp>
#include <coopreg/groups.hpp>
#include <coopreg/penalty.hpp>
#include <coopreg/solver.hpp>
#include <coopreg/types.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace coopreg {

/**
 * Reference estimate used by the degrees-of-freedom approximations:
 * (X'X + gamma I)^-1 X'y. With gamma = 0 this is OLS on a full-rank design
 * and the minimum-norm least-squares solution otherwise.
 */
struct RidgeReference
{
    Vector beta;
    double gamma = 0.0;
    bool min_norm = false;
};

RidgeReference ridge_reference(const Dataset& data, std::optional<double> gamma = std::nullopt);

/// OLS estimate; throws OlsUnavailable when n < p or X is rank deficient.
Vector ols_estimate(const Dataset& data);

/// Counts ratio terms whose reference orthant (or group) norm was zero.
struct DfDiagnostics
{
    int division_guards = 0;
};

/**
 * Coop degrees of freedom from a ridge reference: for each nonzero orthant
 * part of group k, 1 + (p_k^s - 1) / (1 + gamma) * |coop_s| / |ridge_s|,
 * with p_k^s the count of entries of sign s in the ridge reference.
 */
double df_coop(const VectorRef& beta_coop, const VectorRef& beta_ridge, double gamma,
               const GroupPartition& partition, DfDiagnostics* diag = nullptr);

/// Group-Lasso approximation sum_k 1(|b_Gk| > 0)(1 + |b_Gk| / |ref_Gk| (p_k - 1) / (1 + gamma)).
double df_group(const VectorRef& beta_group, const VectorRef& beta_ols, const GroupPartition& partition,
                double gamma = 0.0, DfDiagnostics* diag = nullptr);

/// Number of nonzero coefficients.
double df_lasso(const VectorRef& beta);

enum class Sigma2Source { given, estimated };

/// Residual variance from the OLS fit, RSS / (n - p - 1) with an intercept.
double estimate_sigma2(const Dataset& data);

enum class CvMeasure { squared_error, deviance, misclassification };

std::string_view to_string(CvMeasure m) noexcept;

struct SelectionReport
{
    std::vector<double> lambdas;
    std::vector<double> df;
    std::vector<double> rss;
    std::vector<double> aic;
    std::vector<double> bic;
    std::vector<double> cv_mean;
    std::vector<double> cv_se;
    std::optional<Index> aic_index;
    std::optional<Index> bic_index;
    std::optional<Index> cv_min_index;
    std::optional<Index> cv_1se_index;
    std::optional<double> sigma2;
    Sigma2Source sigma2_source = Sigma2Source::given;
    std::optional<CvMeasure> cv_measure;
    int division_guards = 0;

    std::string to_json() const;
    /// One row per lambda.
    std::string to_csv() const;
};

struct InformationOptions
{
    std::optional<double> sigma2;
    /// Ridge reference parameter; nullopt picks OLS or the minimum-norm solution.
    std::optional<double> gamma;
};

/**
 * AIC = RSS / sigma2 + 2 df and BIC = RSS / sigma2 + log(n) df along a
 * squared-loss path. Stores the df estimate in each fit. The sparse group
 * penalty has no df estimate; its scores are NaN and no index is chosen.
 */
SelectionReport information_criteria(const Dataset& data, PathResult& path, const InformationOptions& options = {});

/// Degrees of freedom for one fit given the reference estimate.
double degrees_of_freedom(const PenaltySpec& spec, const VectorRef& beta, const RidgeReference& ref,
                          DfDiagnostics* diag = nullptr);

struct CvOptions
{
    Index folds = 5;
    std::uint64_t seed = 1;
    std::optional<CvMeasure> measure;
    int jobs = 1;
    Scaling scaling = Scaling::none;
    SolverOptions solver;
};

/// Fold ids in [0, k); stratified by class when `labels` is given.
std::vector<Index> fold_assignment(Index n, Index k, std::uint64_t seed,
                                   const std::vector<int>* labels = nullptr);

/// Most penalized index whose CV error is within one SE of the minimum.
Index one_se_index(const std::vector<double>& cv_mean, const std::vector<double>& cv_se);

/**
 * k-fold cross-validation over a fixed non-increasing lambda grid. Each
 * training fold is prepared from the raw data independently.
 */
SelectionReport cross_validate(const MatrixRef& X_raw, const VectorRef& y_raw, LossSpec loss,
                               const PenaltySpec& spec, const std::vector<double>& lambdas,
                               const CvOptions& options = {});

/// Same with explicit fold ids.
SelectionReport cross_validate(const MatrixRef& X_raw, const VectorRef& y_raw, LossSpec loss,
                               const PenaltySpec& spec, const std::vector<double>& lambdas,
                               const std::vector<Index>& folds, const CvOptions& options = {});

} // namespace coopreg
