#pragma once

#include <coopreg/types.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace coopreg {

enum class LossKind { squared, logistic };

std::string_view to_string(LossKind kind) noexcept;
LossKind parse_loss(std::string_view name);

struct LossSpec
{
    LossKind kind = LossKind::squared;
    /// Unpenalized intercept. With squared loss it is eliminated by
    /// centering; with logistic loss it is fitted alongside beta.
    bool includes_intercept = true;
};

enum class Scaling {
    none,
    unit_variance,
    /// Pooled within-class standard deviation (logistic responses only).
    within_class,
};

/// Linear predictors are clamped to [-kEtaClamp, kEtaClamp] before exponentiation.
inline constexpr double kEtaClamp = 30.0;

/**
 * Prepared regression data. `X` and `y` are the working copies seen by the
 * solver; `column_means`, `scales` and `y_mean` map working coefficients
 * back to the raw scale.
 */
struct Dataset
{
    Matrix X;
    Vector y;
    Vector column_means;
    Vector scales;
    double y_mean = 0.0;
    LossSpec loss;
    /// Columns that were constant before centering (all-zero afterwards).
    std::vector<Index> constant_columns;

    Index n() const noexcept { return X.rows(); }
    Index p() const noexcept { return X.cols(); }
};

/**
 * Builds a Dataset. Squared loss with intercept centers X and y; logistic
 * loss centers X only and keeps y in {0,1}. Without an intercept the data
 * is used as given.
 */
Dataset prepare(const MatrixRef& X, const VectorRef& y, LossSpec loss = {}, Scaling scaling = Scaling::none);

/// Wraps data without any centering or scaling.
Dataset make_dataset(Matrix X, Vector y, LossSpec loss = {LossKind::squared, false});

struct LossEval
{
    double value = 0.0;
    Vector gradient;
    double intercept_gradient = 0.0;
};

/// Half residual sum of squares, or the binomial negative log-likelihood.
LossEval loss_and_gradient(const Dataset& data, const VectorRef& beta, double intercept = 0.0);

double loss_value(const Dataset& data, const VectorRef& beta, double intercept = 0.0);

/// Intercept minimizing the logistic loss at beta = 0 (logit of the mean).
double null_intercept(const Dataset& data);

/// Coefficients and intercept on the raw (uncentered, unscaled) covariate scale.
struct RawCoefficients
{
    Vector beta;
    double intercept = 0.0;
};

RawCoefficients to_raw_scale(const Dataset& data, const VectorRef& beta, double intercept = 0.0);

/// Linear predictor on raw covariates.
Vector predict_link(const Dataset& data, const VectorRef& beta, double intercept, const MatrixRef& X_raw);

/// Numerically stable log(1 + exp(eta)) with clamping.
double log1p_exp(double eta);
double sigmoid(double eta);

} // namespace coopreg
