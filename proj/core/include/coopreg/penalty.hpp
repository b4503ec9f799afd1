#pragma once

#include <coopreg/groups.hpp>
#include <coopreg/types.hpp>

#include <string_view>
#include <utility>
#include <vector>

namespace coopreg {

enum class Family { lasso, group, sgl, coop };

std::string_view to_string(Family family) noexcept;
Family parse_family(std::string_view name);

/**
 * Penalty selector. `alpha` mixes the l1 and group terms of the sparse
 * group penalty, alpha * |v|_1 + (1 - alpha) * sum_k w_k |v_Gk|, and is
 * ignored by the other families. The lasso ignores the group weights.
 */
struct PenaltySpec
{
    Family family = Family::coop;
    double alpha = 0.5;
    GroupPartition partition;

    PenaltySpec() = default;
    PenaltySpec(Family f, GroupPartition g, double a = 0.5);

    Index dim() const noexcept { return partition.dim(); }
};

enum class Orthant { positive, negative };

/**
 * Optimality report at a candidate point. `per_group_scores[k]` holds the
 * violations (g_k+, g_k-) of the positive and negative orthants of group k
 * that are currently zero; an orthant with nonzero coefficients scores 0.
 * For the group and sparse group penalties, which are sign-agnostic, both
 * entries carry the same group score. For the lasso, the pair holds the
 * largest coordinatewise violation in each sign direction within the group.
 *
 * `max_violation` is measured on the relative scale v / max(1, lambda w_k)
 * and covers both the stationarity residual on the support and the
 * subgradient bound on the zero coefficients.
 */
struct KktReport
{
    double max_violation = 0.0;
    Index violating_group = -1;
    Orthant violating_orthant = Orthant::positive;
    std::vector<std::pair<double, double>> per_group_scores;
    /// Largest relative stationarity residual over nonzero coefficients.
    double support_residual = 0.0;
    /// Largest relative subgradient violation over zero coefficients.
    double zero_violation = 0.0;
};

/// Default KKT tolerance, relative to max(1, lambda w_k).
inline constexpr double kDefaultKktTol = 1e-6;

double norm_value(const VectorRef& v, const PenaltySpec& spec);

/// argmin_b 1/2 |b - v|^2 + t * norm_value(b, spec).
Vector prox(const VectorRef& v, double t, const PenaltySpec& spec);

/// Group soft-threshold: (1 - t / |v|)_+ v.
Vector group_shrink(const VectorRef& v, double t);

/// Componentwise soft-threshold.
Vector soft_threshold(const VectorRef& v, double t);

/**
 * Checks 0 in grad + lambda * d|beta| for the selected penalty. For the
 * coop penalty this evaluates, per group k and local index j,
 *   beta_j != 0:  grad_j + lambda w_k beta_j / |phi_j(beta_Gk)| = 0
 *   beta_j == 0:  |phi_j(grad_Gk)| <= lambda w_k
 */
KktReport subdifferential_contains_zero(const VectorRef& beta,
                                        const VectorRef& gradient,
                                        double lambda,
                                        const PenaltySpec& spec);

/**
 * Smallest lambda at which beta = 0 satisfies the optimality conditions,
 * given the smooth-loss gradient at zero (for centered least squares this
 * is -X'y).
 */
double lambda_max_from_gradient(const VectorRef& gradient_at_zero, const PenaltySpec& spec);

/// Dual norm style score max_j |phi_j(c_Gk)| / w_k used by the coop lambda_max.
double coop_group_score(const VectorRef& c_group, double weight);

} // namespace coopreg
