#include <coopreg/glm.hpp>
#include <coopreg/error.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace coopreg {

std::string_view to_string(LossKind kind) noexcept
{
    return kind == LossKind::squared ? "squared" : "logistic";
}

LossKind parse_loss(std::string_view name)
{
    if (name == "squared" || name == "linear" || name == "gaussian") return LossKind::squared;
    if (name == "logistic" || name == "binomial") return LossKind::logistic;
    throw Error(ErrorCode::InvalidArgument, "unknown loss '" + std::string(name) + "'");
}

double log1p_exp(double eta)
{
    eta = std::clamp(eta, -kEtaClamp, kEtaClamp);
    return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

double sigmoid(double eta)
{
    eta = std::clamp(eta, -kEtaClamp, kEtaClamp);
    return 1.0 / (1.0 + std::exp(-eta));
}

Dataset prepare(const MatrixRef& X, const VectorRef& y, LossSpec loss, Scaling scaling)
{
    if (X.rows() != y.size()) {
        throw Error(ErrorCode::DimensionMismatch, "X has " + std::to_string(X.rows()) +
                                                      " rows but y has " + std::to_string(y.size()));
    }
    if (X.rows() < 1) throw Error(ErrorCode::InvalidArgument, "empty dataset");
    if (!X.allFinite() || !y.allFinite()) {
        throw Error(ErrorCode::InvalidArgument, "non-finite values in input");
    }
    if (loss.kind == LossKind::logistic) {
        for (Index i = 0; i < y.size(); ++i) {
            if (y[i] != 0.0 && y[i] != 1.0) {
                throw Error(ErrorCode::NonBinaryResponse,
                            "response " + std::to_string(y[i]) + " at row " + std::to_string(i + 1));
            }
        }
    }
    if (scaling == Scaling::within_class && loss.kind != LossKind::logistic) {
        throw Error(ErrorCode::InvalidArgument, "within-class scaling needs a binary response");
    }

    const Index n = X.rows();
    const Index p = X.cols();
    Dataset d;
    d.loss = loss;
    d.X = X;
    d.y = y;
    d.column_means = Vector::Zero(p);
    d.scales = Vector::Ones(p);

    for (Index j = 0; j < p; ++j) {
        const double lo = X.col(j).minCoeff();
        const double hi = X.col(j).maxCoeff();
        if (lo == hi) d.constant_columns.push_back(j);
    }

    if (loss.includes_intercept) {
        d.column_means = X.colwise().mean().transpose();
        d.X.rowwise() -= d.column_means.transpose();
        for (Index j : d.constant_columns) d.X.col(j).setZero();
        if (loss.kind == LossKind::squared) {
            d.y_mean = y.mean();
            d.y.array() -= d.y_mean;
        }
    }

    if (scaling == Scaling::unit_variance) {
        for (Index j = 0; j < p; ++j) {
            const double sd = std::sqrt(d.X.col(j).squaredNorm() / static_cast<double>(n));
            if (sd > 0) {
                d.scales[j] = sd;
                d.X.col(j) /= sd;
            }
        }
    } else if (scaling == Scaling::within_class) {
        // Pooled within-class variance from the training labels.
        for (Index j = 0; j < p; ++j) {
            double ss = 0.0;
            for (int cls = 0; cls < 2; ++cls) {
                double sum = 0.0;
                Index cnt = 0;
                for (Index i = 0; i < n; ++i) {
                    if (y[i] == cls) { sum += X(i, j); ++cnt; }
                }
                if (cnt == 0) continue;
                const double m = sum / static_cast<double>(cnt);
                for (Index i = 0; i < n; ++i) {
                    if (y[i] == cls) ss += (X(i, j) - m) * (X(i, j) - m);
                }
            }
            const double sd = std::sqrt(ss / static_cast<double>(n));
            if (sd > 0) {
                d.scales[j] = sd;
                d.X.col(j) /= sd;
            }
        }
    }
    return d;
}

Dataset make_dataset(Matrix X, Vector y, LossSpec loss)
{
    if (X.rows() != y.size()) {
        throw Error(ErrorCode::DimensionMismatch, "X has " + std::to_string(X.rows()) +
                                                      " rows but y has " + std::to_string(y.size()));
    }
    Dataset d;
    d.loss = loss;
    d.column_means = Vector::Zero(X.cols());
    d.scales = Vector::Ones(X.cols());
    d.X = std::move(X);
    d.y = std::move(y);
    return d;
}

double null_intercept(const Dataset& data)
{
    if (data.loss.kind != LossKind::logistic || !data.loss.includes_intercept) return 0.0;
    const double ybar = data.y.mean();
    if (ybar <= 0.0) return -kEtaClamp;
    if (ybar >= 1.0) return kEtaClamp;
    return std::log(ybar / (1.0 - ybar));
}

LossEval loss_and_gradient(const Dataset& data, const VectorRef& beta, double intercept)
{
    if (beta.size() != data.p()) {
        throw Error(ErrorCode::DimensionMismatch, "beta has length " + std::to_string(beta.size()) +
                                                      ", expected " + std::to_string(data.p()));
    }
    LossEval out;
    if (data.loss.kind == LossKind::squared) {
        const Vector r = data.X * beta - data.y;
        out.value = 0.5 * r.squaredNorm();
        out.gradient = data.X.transpose() * r;
        return out;
    }
    const Vector eta = (data.X * beta).array() + intercept;
    Vector resid(data.n());
    double value = 0.0;
    for (Index i = 0; i < data.n(); ++i) {
        value += log1p_exp(eta[i]) - data.y[i] * std::clamp(eta[i], -kEtaClamp, kEtaClamp);
        resid[i] = sigmoid(eta[i]) - data.y[i];
    }
    if (!std::isfinite(value)) throw Error(ErrorCode::NonFiniteLoss, "logistic loss overflow");
    out.value = value;
    out.gradient = data.X.transpose() * resid;
    out.intercept_gradient = data.loss.includes_intercept ? resid.sum() : 0.0;
    return out;
}

double loss_value(const Dataset& data, const VectorRef& beta, double intercept)
{
    if (data.loss.kind == LossKind::squared) return 0.5 * (data.X * beta - data.y).squaredNorm();
    const Vector eta = (data.X * beta).array() + intercept;
    double value = 0.0;
    for (Index i = 0; i < data.n(); ++i) {
        value += log1p_exp(eta[i]) - data.y[i] * std::clamp(eta[i], -kEtaClamp, kEtaClamp);
    }
    return value;
}

RawCoefficients to_raw_scale(const Dataset& data, const VectorRef& beta, double intercept)
{
    RawCoefficients raw;
    raw.beta = beta.cwiseQuotient(data.scales);
    raw.intercept = intercept + data.y_mean - data.column_means.dot(raw.beta);
    return raw;
}

Vector predict_link(const Dataset& data, const VectorRef& beta, double intercept, const MatrixRef& X_raw)
{
    const RawCoefficients raw = to_raw_scale(data, beta, intercept);
    return (X_raw * raw.beta).array() + raw.intercept;
}

} // namespace coopreg
