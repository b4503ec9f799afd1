#pragma once

#include <coopreg/glm.hpp>
#include <coopreg/penalty.hpp>
#include <coopreg/types.hpp>

#include <optional>
#include <vector>

namespace coopreg {

struct SolverOptions
{
    /// KKT tolerance on the relative scale max(1, lambda w_k).
    double tol = kDefaultKktTol;
    int max_outer = 2000;
    long max_inner = 200000;
    /// Cache X'X for squared loss when p is at most this size.
    Index gram_limit = 4000;
};

/**
 * Coefficients allowed to be nonzero. A coordinate in both sets is free;
 * in `plus` only it is constrained to be >= 0, in `minus` only to be <= 0.
 * Membership changes groupwise (coordinatewise for the lasso).
 */
struct ActiveSets
{
    std::vector<bool> plus;
    std::vector<bool> minus;

    static ActiveSets empty(Index p);
    /// Initial sets for a feasible starting point.
    static ActiveSets from_beta(const VectorRef& beta, const PenaltySpec& spec);

    bool is_active(Index j) const { return plus[j] || minus[j]; }
    Index count() const;
};

enum class FitStatus { converged, max_iterations };

struct FitResult
{
    Vector beta;
    double intercept = 0.0;
    double lambda = 0.0;
    double objective = 0.0;
    double kkt_residual = 0.0;
    ActiveSets active;
    int outer_iterations = 0;
    long inner_iterations = 0;
    std::optional<double> df;
    FitStatus status = FitStatus::converged;

    bool converged() const noexcept { return status == FitStatus::converged; }
};

struct PathResult
{
    std::vector<double> lambdas;
    std::vector<FitResult> fits;
    PenaltySpec spec;
};

/// Smooth loss plus lambda times the penalty.
double penalized_objective(const Dataset& data, const PenaltySpec& spec, double lambda,
                           const VectorRef& beta, double intercept = 0.0);

/// Smallest lambda for which beta = 0 is optimal.
double lambda_max(const Dataset& data, const PenaltySpec& spec);

/// Gradient of the smooth loss with respect to beta at the given intercept.
Vector smooth_gradient(const Dataset& data, const VectorRef& beta, double intercept);

/// Runs the optimality checker on a fit.
KktReport certify(const Dataset& data, const PenaltySpec& spec, const FitResult& fit);

/// Result of the restricted smooth problem on the current active sets.
struct SubproblemResult
{
    Vector beta;
    double intercept = 0.0;
    /// Groups (coordinates for the lasso) whose active orthant part ended at zero.
    std::vector<Index> deactivated_plus;
    std::vector<Index> deactivated_minus;
    long iterations = 0;
    bool converged = true;
};

/**
 * Active-set solver. Holds per-dataset caches so that a path reuses them;
 * fits themselves are independent and the object is not mutated by fit().
 */
class ActiveSetSolver
{
public:
    ActiveSetSolver(const Dataset& data, const PenaltySpec& spec, SolverOptions options = {});

    FitResult fit(double lambda,
                  const std::optional<Vector>& init = std::nullopt,
                  std::optional<double> intercept_init = std::nullopt) const;

    /// Step 1 on fixed active sets. `active` is updated to drop the
    /// orthants that ended at zero.
    SubproblemResult solve_active_subproblem(double lambda,
                                             ActiveSets& active,
                                             const VectorRef& beta_init,
                                             double intercept_init,
                                             double inner_tol) const;

    const Dataset& data() const noexcept { return data_; }
    const PenaltySpec& spec() const noexcept { return spec_; }
    const SolverOptions& options() const noexcept { return options_; }

private:
    struct Layout;
    struct Workspace;

    Vector full_gradient(const VectorRef& beta, double intercept) const;

    const Dataset& data_;
    const PenaltySpec& spec_;
    SolverOptions options_;
    bool logistic_;
    bool fit_intercept_;
    Matrix gram_;
    Vector xty_;
    double yty_ = 0.0;
    bool has_gram_ = false;
};

FitResult fit(const Dataset& data, const PenaltySpec& spec, double lambda,
              const std::optional<Vector>& init = std::nullopt, SolverOptions options = {});

struct PathOptions
{
    Index n_lambda = 100;
    /// Defaults to 1e-3 when n > p and 1e-2 otherwise.
    std::optional<double> lambda_min_ratio;
    SolverOptions solver;
};

double default_lambda_min_ratio(Index n, Index p);

/// Log-spaced grid from lambda_max down to ratio * lambda_max.
std::vector<double> lambda_grid(double lambda_max, Index n_lambda, double ratio);

PathResult path(const Dataset& data, const PenaltySpec& spec, const PathOptions& options = {});

/// Warm-started path over an explicit non-increasing grid.
PathResult path(const Dataset& data, const PenaltySpec& spec, const std::vector<double>& lambdas,
                const SolverOptions& options = {});

/**
 * Reference solver: accelerated proximal gradient on the full coefficient
 * vector using the public prox, with no active-set bookkeeping. Used to
 * cross-check the active-set solver.
 */
FitResult reference_fit(const Dataset& data, const PenaltySpec& spec, double lambda,
                        double grad_map_tol = 1e-11, long max_iter = 2000000);

} // namespace coopreg
