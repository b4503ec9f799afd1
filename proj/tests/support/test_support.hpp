#pragma once

// Independent oracles and generators shared by the unit and acceptance tests.
// Nothing here calls the solver; gradients and least-squares solutions are
// recomputed from first principles.

#include <coopreg/glm.hpp>
#include <coopreg/groups.hpp>
#include <coopreg/penalty.hpp>
#include <coopreg/solver.hpp>

#include <random>

namespace coopreg::testing {

using Rng = std::mt19937_64;

Matrix gaussian_matrix(Index n, Index p, Rng& rng);
Vector gaussian_vector(Index n, Rng& rng);
double uniform(Rng& rng, double lo, double hi);
Index uniform_index(Rng& rng, Index lo, Index hi);

/// Random partition of {0..p-1} into groups of size 1..max_size, members shuffled.
GroupPartition random_partition(Index p, Rng& rng, Index max_size = 4);

/// Group sizes drawn in 1..max_size summing to p, kept contiguous.
GroupPartition random_contiguous_partition(Index p, Rng& rng, Index max_size = 4);

/// n x p with centered, mutually orthogonal, unit-norm columns (n > p).
Matrix centered_orthonormal(Index n, Index p, Rng& rng);

/// Vector with random zeros and mixed signs.
Vector sparse_vector(Index p, Rng& rng, double zero_prob = 0.3);

/// Gradient of the smooth loss written out directly (no library call).
Vector direct_gradient(const Dataset& data, const VectorRef& beta, double intercept);
double direct_intercept_gradient(const Dataset& data, const VectorRef& beta, double intercept);

/// Least squares by the normal equations.
Vector normal_equations(const MatrixRef& X, const VectorRef& y);

/**
 * Optimality residual of a fit recomputed from the direct gradient and the
 * subdifferential checker, including the logistic intercept gradient. Every
 * call is tallied in a process-wide ledger.
 */
double certificate(const Dataset& data, const PenaltySpec& spec, const FitResult& fit);

struct CertificateLedger
{
    long fits = 0;
    long failures = 0;
    double worst = 0.0;
};

CertificateLedger& ledger();

/// Fits and certifies in one step; throws when the certificate exceeds the tolerance.
FitResult certified_fit(const Dataset& data, const PenaltySpec& spec, double lambda,
                        const std::optional<Vector>& init = std::nullopt, SolverOptions options = {});

/// Certifies every fit of a path; returns the worst residual or throws.
double certify_path(const Dataset& data, const PathResult& path);

/// Central finite-difference gradient of the loss in beta.
Vector finite_difference_gradient(const Dataset& data, const VectorRef& beta, double intercept, double h = 1e-6);

} // namespace coopreg::testing
