#pragma once

#include <coopreg/groups.hpp>
#include <coopreg/penalty.hpp>
#include <coopreg/solver.hpp>
#include <coopreg/types.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coopreg {

/// Population covariance, true coefficients and group structure.
struct TruthSpec
{
    Matrix psi;
    Vector beta_star;
    GroupPartition partition;

    /// Checks symmetry, positive definiteness and dimensions.
    void validate() const;
};

enum class IrrepStatus {
    excluded_ok,
    excluded_fail,
    intersect_ok,
    intersect_fail_sign,
    intersect_fail_norm,
    full,
    sign_incoherent_violation,
};

std::string_view to_string(IrrepStatus s) noexcept;
bool is_ok(IrrepStatus s) noexcept;

struct GroupIrrep
{
    IrrepStatus status = IrrepStatus::full;
    /// Slack 1 - (norm quantity); NaN where no norm condition applies.
    double margin = 0.0;
    /// Largest nu_k R_j over the group's zero entries (sign condition), NaN if unused.
    double sign_slack = 0.0;
};

struct IrrepReport
{
    std::vector<GroupIrrep> coop;
    std::vector<GroupIrrep> group_lasso;

    bool coop_ok() const;
    bool group_lasso_ok() const;
    std::string to_json() const;
};

/// Slack used for ties in the norm and sign conditions.
inline constexpr double kIrrepSlack = 1e-10;

/**
 * Diagonal of D(beta): w_k / |phi_j(beta_Gk)| on the support, 0 elsewhere.
 * The group-Lasso variant uses w_k / |beta_Gk|.
 */
Vector weighting_diagonal(const VectorRef& beta, const GroupPartition& partition);
Vector group_weighting_diagonal(const VectorRef& beta, const GroupPartition& partition);

/**
 * Evaluates the sign-incoherence inclusion condition, the coop
 * irrepresentable norm and sign conditions per group, and the group-Lasso
 * analogue. Throws SingularSupportBlock when Psi_SS is not invertible.
 */
IrrepReport check_assumptions(const TruthSpec& truth);

/// Draws n rows from N(0, Psi) through the Cholesky factor.
Matrix sample_gaussian(const MatrixRef& chol_lower, Index n, std::uint64_t seed);

struct RecoveryOptions
{
    Index n = 20;
    double sigma = 0.1;
    Index replicates = 1000;
    std::uint64_t seed = 1;
    int jobs = 1;
    Index n_lambda = 50;
    double lambda_min_ratio = 1e-3;
    /// Append lambda = 0 (the unpenalized fit) to each path when n > p.
    bool include_unpenalized = true;
    double sgl_alpha = 0.5;
    /// BIC uses sigma^2 when true, the OLS residual variance otherwise.
    bool known_sigma = true;
    SolverOptions solver;
};

struct RecoveryResult
{
    Family family = Family::coop;
    Index replicates = 0;
    /// Fraction of replicates where some lambda recovers the signed support.
    double recovery_frequency = 0.0;
    /// Sign error of the BIC-selected model (sigma known), mean and SE.
    double mean_sign_error = 0.0;
    double sign_error_se = 0.0;
    double mean_rmse = 0.0;
    /// Fraction of replicates where BIC selects the smallest lambda.
    double bic_selects_unpenalized = 0.0;
};

RecoveryResult empirical_recovery(const TruthSpec& truth, Family family, const RecoveryOptions& options);

/**
 * Covariance family over eight predictors in four pairs. Identity except:
 * corr(x1, x2) = corr(x3, x4) = within; x5 has correlation `cross` with x1
 * and x2, x6 with x3 and x4; x7 and x8 likewise with `cross2`; x5, x7 (and
 * x6, x8) share only their projection on the support; corr(x5, x6) =
 * corr(x7, x8) = zero_pair.
 */
Matrix illustration_psi(double cross, double within, double cross2 = 0.0, double zero_pair = 0.0);

/// Parameters of the covariance used by illustration_truth().
inline constexpr double kIllustrationCross = 0.48;
inline constexpr double kIllustrationWithin = -0.3;
inline constexpr double kIllustrationCross2 = 0.34;
inline constexpr double kIllustrationZeroPair = 0.3;

/**
 * beta* = (1, 1, -1, -1, 0, 0, 0, 0) on groups {1,2},{3,4},{5,6},{7,8} with
 * a covariance for which the coop conditions hold but the group-Lasso
 * analogue fails on {5,6}.
 */
TruthSpec illustration_truth();

/// Recovery settings of the illustration: n = 20, sigma = 0.1, 50 lambdas down to 3e-3 lambda_max.
RecoveryOptions illustration_options();

TruthSpec parse_truth_json(const std::string& text);
std::string truth_to_json(const TruthSpec& truth);

} // namespace coopreg
