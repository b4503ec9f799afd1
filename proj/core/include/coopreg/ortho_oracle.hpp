#pragma once

#include <coopreg/groups.hpp>
#include <coopreg/penalty.hpp>
#include <coopreg/types.hpp>

namespace coopreg::ortho {

// Closed-form estimators for an orthonormal design (X'X = I), written as
// shrinkage of the least-squares coefficients. They never flip a sign.

/// beta_j = (1 - lambda w_k / |phi_j(ols_Gk)|)_+ ols_j
Vector coop_closed_form(const VectorRef& beta_ols, double lambda, const GroupPartition& partition);

/// beta_j = (1 - lambda w_k / |ols_Gk|)_+ ols_j
Vector group_closed_form(const VectorRef& beta_ols, double lambda, const GroupPartition& partition);

/// beta_j = (1 - lambda / |ols_j|)_+ ols_j
Vector lasso_closed_form(const VectorRef& beta_ols, double lambda);

/// Lasso shrink at lambda alpha, then group shrink at lambda (1 - alpha).
Vector sgl_closed_form(const VectorRef& beta_ols, double lambda, double alpha, const GroupPartition& partition);

/// Dispatches on the penalty family.
Vector closed_form(const VectorRef& beta_ols, double lambda, const PenaltySpec& spec);

/// One row of a shrinkage surface over the OLS plane of a two-element group.
struct ShrinkPoint
{
    double ols1 = 0.0;
    double ols2 = 0.0;
    double beta1 = 0.0;
    double beta2 = 0.0;
};

/// Evaluates the closed form on a (steps x steps) grid over [-range, range]^2.
std::vector<ShrinkPoint> shrinkage_surface(Family family, double lambda, double weight, double alpha,
                                           double range, Index steps);

} // namespace coopreg::ortho
