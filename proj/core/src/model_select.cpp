#include <coopreg/model_select.hpp>
#include <coopreg/error.hpp>
#include <coopreg/io.hpp>
#include <coopreg/parallel.hpp>

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace coopreg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

nlohmann::json number_or_null(double v)
{
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json vector_json(const std::vector<double>& v)
{
    nlohmann::json arr = nlohmann::json::array();
    for (double x : v) arr.push_back(number_or_null(x));
    return arr;
}

template <class T>
nlohmann::json optional_json(const std::optional<T>& v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

} // namespace

Vector ols_estimate(const Dataset& data)
{
    if (data.n() < data.p()) {
        throw Error(ErrorCode::OlsUnavailable, "n = " + std::to_string(data.n()) + " < p = " + std::to_string(data.p()));
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(data.X);
    if (qr.rank() < data.p()) throw Error(ErrorCode::OlsUnavailable, "design is rank deficient");
    return qr.solve(data.y);
}

RidgeReference ridge_reference(const Dataset& data, std::optional<double> gamma)
{
    RidgeReference ref;
    const double g = gamma.value_or(0.0);
    if (g < 0) throw Error(ErrorCode::InvalidArgument, "ridge gamma must be nonnegative");
    ref.gamma = g;
    if (g > 0) {
        Matrix A = data.X.transpose() * data.X;
        A.diagonal().array() += g;
        ref.beta = A.ldlt().solve(data.X.transpose() * data.y);
        return ref;
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(data.X);
    if (data.n() >= data.p() && qr.rank() == data.p()) {
        ref.beta = qr.solve(data.y);
        return ref;
    }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(data.X);
    ref.beta = cod.solve(data.y);
    ref.min_norm = true;
    return ref;
}

double df_coop(const VectorRef& beta_coop, const VectorRef& beta_ridge, double gamma,
               const GroupPartition& partition, DfDiagnostics* diag)
{
    if (beta_coop.size() != partition.dim() || beta_ridge.size() != partition.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "df_coop inputs differ in length from the partition");
    }
    double df = 0.0;
    for (Index k = 0; k < partition.num_groups(); ++k) {
        const Vector b = partition.gather(beta_coop, k);
        const Vector r = partition.gather(beta_ridge, k);
        for (int side = 0; side < 2; ++side) {
            const Vector bs = side == 0 ? Vector(b.cwiseMax(0.0)) : Vector(b.cwiseMin(0.0));
            const double nb = bs.norm();
            if (nb == 0.0) continue;
            const Vector rs = side == 0 ? Vector(r.cwiseMax(0.0)) : Vector(r.cwiseMin(0.0));
            const double nr = rs.norm();
            const double count = static_cast<double>(side == 0 ? (r.array() > 0).count() : (r.array() < 0).count());
            double ratio = 1.0;
            if (nr > 0) {
                ratio = nb / nr;
            } else if (diag) {
                ++diag->division_guards;
            }
            df += 1.0 + (count - 1.0) / (1.0 + gamma) * ratio;
        }
    }
    return df;
}

double df_group(const VectorRef& beta_group, const VectorRef& beta_ols, const GroupPartition& partition,
                double gamma, DfDiagnostics* diag)
{
    if (beta_group.size() != partition.dim() || beta_ols.size() != partition.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "df_group inputs differ in length from the partition");
    }
    double df = 0.0;
    for (Index k = 0; k < partition.num_groups(); ++k) {
        const double nb = partition.gather(beta_group, k).norm();
        if (nb == 0.0) continue;
        const double nr = partition.gather(beta_ols, k).norm();
        double ratio = 1.0;
        if (nr > 0) {
            ratio = nb / nr;
        } else if (diag) {
            ++diag->division_guards;
        }
        df += 1.0 + ratio * static_cast<double>(partition.group_size(k) - 1) / (1.0 + gamma);
    }
    return df;
}

double df_lasso(const VectorRef& beta)
{
    return static_cast<double>((beta.array() != 0.0).count());
}

double degrees_of_freedom(const PenaltySpec& spec, const VectorRef& beta, const RidgeReference& ref,
                          DfDiagnostics* diag)
{
    switch (spec.family) {
        case Family::lasso: return df_lasso(beta);
        case Family::group: return df_group(beta, ref.beta, spec.partition, ref.gamma, diag);
        case Family::coop: return df_coop(beta, ref.beta, ref.gamma, spec.partition, diag);
        case Family::sgl: return kNaN;
    }
    return kNaN;
}

double estimate_sigma2(const Dataset& data)
{
    if (data.n() <= data.p()) {
        throw Error(ErrorCode::InvalidArgument,
                    "sigma2 must be supplied when n <= p (n = " + std::to_string(data.n()) +
                        ", p = " + std::to_string(data.p()) + ")");
    }
    const Vector beta = ols_estimate(data);
    const double rss = (data.y - data.X * beta).squaredNorm();
    // One more degree of freedom is spent on the eliminated intercept.
    const Index used = data.p() + (data.loss.includes_intercept ? 1 : 0);
    if (data.n() <= used) throw Error(ErrorCode::InvalidArgument, "not enough residual degrees of freedom");
    return rss / static_cast<double>(data.n() - used);
}

SelectionReport information_criteria(const Dataset& data, PathResult& path, const InformationOptions& options)
{
    if (data.loss.kind != LossKind::squared) {
        throw Error(ErrorCode::InvalidArgument, "information criteria are defined for the linear model");
    }
    SelectionReport rep;
    rep.lambdas = path.lambdas;
    if (options.sigma2) {
        if (!(*options.sigma2 > 0)) throw Error(ErrorCode::InvalidArgument, "sigma2 must be positive");
        rep.sigma2 = *options.sigma2;
        rep.sigma2_source = Sigma2Source::given;
    } else {
        rep.sigma2 = estimate_sigma2(data);
        rep.sigma2_source = Sigma2Source::estimated;
    }
    const double s2 = *rep.sigma2;
    const double logn = std::log(static_cast<double>(data.n()));

    RidgeReference ref;
    if (path.spec.family == Family::group || path.spec.family == Family::coop) {
        ref = ridge_reference(data, options.gamma);
    }
    DfDiagnostics diag;
    double best_aic = std::numeric_limits<double>::infinity();
    double best_bic = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < path.fits.size(); ++i) {
        FitResult& f = path.fits[i];
        const double rss = (data.y - data.X * f.beta).squaredNorm();
        const double df = degrees_of_freedom(path.spec, f.beta, ref, &diag);
        if (std::isfinite(df)) f.df = df;
        const double aic = rss / s2 + 2.0 * df;
        const double bic = rss / s2 + logn * df;
        rep.rss.push_back(rss);
        rep.df.push_back(df);
        rep.aic.push_back(aic);
        rep.bic.push_back(bic);
        if (std::isfinite(aic) && aic < best_aic) {
            best_aic = aic;
            rep.aic_index = static_cast<Index>(i);
        }
        if (std::isfinite(bic) && bic < best_bic) {
            best_bic = bic;
            rep.bic_index = static_cast<Index>(i);
        }
    }
    rep.division_guards = diag.division_guards;
    return rep;
}

std::string_view to_string(CvMeasure m) noexcept
{
    switch (m) {
        case CvMeasure::squared_error: return "squared_error";
        case CvMeasure::deviance: return "deviance";
        case CvMeasure::misclassification: return "misclassification";
    }
    return "unknown";
}

std::vector<Index> fold_assignment(Index n, Index k, std::uint64_t seed, const std::vector<int>* labels)
{
    if (k < 2) throw Error(ErrorCode::InvalidArgument, "need at least two folds");
    if (k > n) throw Error(ErrorCode::FoldTooSmall, std::to_string(k) + " folds for " + std::to_string(n) + " rows");
    std::mt19937_64 rng(seed);
    std::vector<Index> folds(static_cast<std::size_t>(n));
    auto deal = [&](std::vector<Index> rows, Index offset) {
        std::shuffle(rows.begin(), rows.end(), rng);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            folds[rows[i]] = (static_cast<Index>(i) + offset) % k;
        }
        return static_cast<Index>(rows.size());
    };
    if (labels) {
        std::vector<Index> zeros;
        std::vector<Index> ones;
        for (Index i = 0; i < n; ++i) ((*labels)[i] ? ones : zeros).push_back(i);
        const Index used = deal(zeros, 0);
        deal(ones, used);
    } else {
        std::vector<Index> rows(static_cast<std::size_t>(n));
        std::iota(rows.begin(), rows.end(), Index{0});
        deal(rows, 0);
    }
    return folds;
}

Index one_se_index(const std::vector<double>& cv_mean, const std::vector<double>& cv_se)
{
    if (cv_mean.empty()) throw Error(ErrorCode::InvalidArgument, "empty CV curve");
    const auto min_it = std::min_element(cv_mean.begin(), cv_mean.end());
    const auto imin = static_cast<std::size_t>(min_it - cv_mean.begin());
    const double bound = cv_mean[imin] + cv_se[imin];
    for (std::size_t i = 0; i <= imin; ++i) {
        if (cv_mean[i] <= bound) return static_cast<Index>(i);
    }
    return static_cast<Index>(imin);
}

SelectionReport cross_validate(const MatrixRef& X_raw, const VectorRef& y_raw, LossSpec loss,
                               const PenaltySpec& spec, const std::vector<double>& lambdas, const CvOptions& options)
{
    std::vector<int> labels;
    const std::vector<int>* strat = nullptr;
    if (loss.kind == LossKind::logistic) {
        labels.resize(static_cast<std::size_t>(y_raw.size()));
        for (Index i = 0; i < y_raw.size(); ++i) labels[i] = y_raw[i] > 0.5 ? 1 : 0;
        strat = &labels;
    }
    const auto folds = fold_assignment(X_raw.rows(), options.folds, options.seed, strat);
    return cross_validate(X_raw, y_raw, loss, spec, lambdas, folds, options);
}

SelectionReport cross_validate(const MatrixRef& X_raw, const VectorRef& y_raw, LossSpec loss,
                               const PenaltySpec& spec, const std::vector<double>& lambdas,
                               const std::vector<Index>& folds, const CvOptions& options)
{
    const Index n = X_raw.rows();
    if (static_cast<Index>(folds.size()) != n) throw Error(ErrorCode::DimensionMismatch, "fold ids do not match rows");
    const Index k = folds.empty() ? 0 : *std::max_element(folds.begin(), folds.end()) + 1;
    if (k < 2) throw Error(ErrorCode::InvalidArgument, "need at least two folds");
    const CvMeasure measure = options.measure.value_or(
        loss.kind == LossKind::squared ? CvMeasure::squared_error : CvMeasure::deviance);
    if (loss.kind == LossKind::squared && measure != CvMeasure::squared_error) {
        throw Error(ErrorCode::InvalidArgument, "deviance and misclassification need a logistic loss");
    }

    std::vector<std::vector<Index>> test_rows(static_cast<std::size_t>(k));
    for (Index i = 0; i < n; ++i) test_rows[folds[i]].push_back(i);
    for (Index f = 0; f < k; ++f) {
        if (test_rows[f].empty() || static_cast<Index>(test_rows[f].size()) == n) {
            throw Error(ErrorCode::FoldTooSmall, "fold " + std::to_string(f + 1) + " is empty or covers all rows");
        }
    }

    const std::size_t L = lambdas.size();
    std::vector<std::vector<double>> errors(static_cast<std::size_t>(k), std::vector<double>(L, kNaN));

    parallel_for(k, options.jobs, [&](std::int64_t f) {
        std::vector<Index> train;
        for (Index i = 0; i < n; ++i) {
            if (folds[i] != f) train.push_back(i);
        }
        const auto& test = test_rows[f];
        Matrix Xtr(static_cast<Index>(train.size()), X_raw.cols());
        Vector ytr(static_cast<Index>(train.size()));
        for (std::size_t i = 0; i < train.size(); ++i) {
            Xtr.row(static_cast<Index>(i)) = X_raw.row(train[i]);
            ytr[static_cast<Index>(i)] = y_raw[train[i]];
        }
        Matrix Xte(static_cast<Index>(test.size()), X_raw.cols());
        Vector yte(static_cast<Index>(test.size()));
        for (std::size_t i = 0; i < test.size(); ++i) {
            Xte.row(static_cast<Index>(i)) = X_raw.row(test[i]);
            yte[static_cast<Index>(i)] = y_raw[test[i]];
        }
        const Dataset train_data = prepare(Xtr, ytr, loss, options.scaling);
        const PathResult pr = path(train_data, spec, lambdas, options.solver);
        for (std::size_t l = 0; l < L; ++l) {
            const Vector eta = predict_link(train_data, pr.fits[l].beta, pr.fits[l].intercept, Xte);
            double err = 0.0;
            for (Index i = 0; i < yte.size(); ++i) {
                switch (measure) {
                    case CvMeasure::squared_error:
                        err += (yte[i] - eta[i]) * (yte[i] - eta[i]);
                        break;
                    case CvMeasure::deviance:
                        err += 2.0 * (log1p_exp(eta[i]) - yte[i] * std::clamp(eta[i], -kEtaClamp, kEtaClamp));
                        break;
                    case CvMeasure::misclassification:
                        err += ((eta[i] > 0) != (yte[i] > 0.5)) ? 1.0 : 0.0;
                        break;
                }
            }
            errors[f][l] = err / static_cast<double>(yte.size());
        }
    });

    SelectionReport rep;
    rep.lambdas = lambdas;
    rep.cv_measure = measure;
    rep.cv_mean.assign(L, 0.0);
    rep.cv_se.assign(L, 0.0);
    const double kd = static_cast<double>(k);
    for (std::size_t l = 0; l < L; ++l) {
        double mean = 0.0;
        for (Index f = 0; f < k; ++f) mean += errors[f][l];
        mean /= kd;
        double ss = 0.0;
        for (Index f = 0; f < k; ++f) ss += (errors[f][l] - mean) * (errors[f][l] - mean);
        rep.cv_mean[l] = mean;
        rep.cv_se[l] = std::sqrt(ss / (kd - 1.0)) / std::sqrt(kd);
    }
    if (L > 0) {
        rep.cv_min_index = static_cast<Index>(std::min_element(rep.cv_mean.begin(), rep.cv_mean.end()) - rep.cv_mean.begin());
        rep.cv_1se_index = one_se_index(rep.cv_mean, rep.cv_se);
    }
    return rep;
}

std::string SelectionReport::to_json() const
{
    nlohmann::json j;
    j["lambdas"] = vector_json(lambdas);
    j["df"] = vector_json(df);
    j["rss"] = vector_json(rss);
    j["aic"] = vector_json(aic);
    j["bic"] = vector_json(bic);
    j["cv_mean"] = vector_json(cv_mean);
    j["cv_se"] = vector_json(cv_se);
    j["chosen"] = {
        {"aic", optional_json(aic_index)},
        {"bic", optional_json(bic_index)},
        {"cv_min", optional_json(cv_min_index)},
        {"cv_1se", optional_json(cv_1se_index)},
    };
    j["sigma2"] = sigma2 ? number_or_null(*sigma2) : nlohmann::json(nullptr);
    j["sigma2_source"] = sigma2 ? (sigma2_source == Sigma2Source::given ? "given" : "estimated") : "none";
    j["cv_measure"] = cv_measure ? nlohmann::json(std::string(to_string(*cv_measure))) : nlohmann::json(nullptr);
    j["division_guards"] = division_guards;
    return j.dump(2);
}

std::string SelectionReport::to_csv() const
{
    std::ostringstream out;
    out << "index,lambda,df,rss,aic,bic,cv_mean,cv_se\n";
    auto at = [](const std::vector<double>& v, std::size_t i) { return i < v.size() ? v[i] : kNaN; };
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        out << i << ',' << format_number(lambdas[i]) << ',' << format_number(at(df, i)) << ','
            << format_number(at(rss, i)) << ',' << format_number(at(aic, i)) << ',' << format_number(at(bic, i))
            << ',' << format_number(at(cv_mean, i)) << ',' << format_number(at(cv_se, i)) << '\n';
    }
    return out.str();
}

} // namespace coopreg
