#include <coopreg/diagnostics.hpp>
#include <coopreg/error.hpp>
#include <coopreg/glm.hpp>
#include <coopreg/model_select.hpp>
#include <coopreg/parallel.hpp>

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace coopreg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int sign_of(double v) { return (v > 0) - (v < 0); }

nlohmann::json number_or_null(double v)
{
    if (std::isfinite(v)) return v;
    return nullptr;
}

} // namespace

void TruthSpec::validate() const
{
    const Index p = psi.rows();
    if (psi.cols() != p) throw Error(ErrorCode::DimensionMismatch, "psi must be square");
    if (beta_star.size() != p) throw Error(ErrorCode::DimensionMismatch, "beta_star length differs from psi");
    if (partition.dim() != p) throw Error(ErrorCode::DimensionMismatch, "partition dimension differs from psi");
    if (!psi.allFinite() || !beta_star.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite truth entries");
    const double scale = std::max(1.0, psi.cwiseAbs().maxCoeff());
    if ((psi - psi.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw Error(ErrorCode::InvalidArgument, "psi is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(psi, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() > 0.0)) throw Error(ErrorCode::InvalidArgument, "psi is not positive definite");
}

std::string_view to_string(IrrepStatus s) noexcept
{
    switch (s) {
        case IrrepStatus::excluded_ok: return "excluded_ok";
        case IrrepStatus::excluded_fail: return "excluded_fail";
        case IrrepStatus::intersect_ok: return "intersect_ok";
        case IrrepStatus::intersect_fail_sign: return "intersect_fail_sign";
        case IrrepStatus::intersect_fail_norm: return "intersect_fail_norm";
        case IrrepStatus::full: return "full";
        case IrrepStatus::sign_incoherent_violation: return "sign_incoherent_violation";
    }
    return "unknown";
}

bool is_ok(IrrepStatus s) noexcept
{
    return s == IrrepStatus::excluded_ok || s == IrrepStatus::intersect_ok || s == IrrepStatus::full;
}

bool IrrepReport::coop_ok() const
{
    return std::all_of(coop.begin(), coop.end(), [](const GroupIrrep& g) { return is_ok(g.status); });
}

bool IrrepReport::group_lasso_ok() const
{
    return std::all_of(group_lasso.begin(), group_lasso.end(), [](const GroupIrrep& g) { return is_ok(g.status); });
}

std::string IrrepReport::to_json() const
{
    auto rows = [](const std::vector<GroupIrrep>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (std::size_t k = 0; k < v.size(); ++k) {
            a.push_back({{"group", k + 1},
                         {"status", std::string(to_string(v[k].status))},
                         {"margin", number_or_null(v[k].margin)},
                         {"sign_slack", number_or_null(v[k].sign_slack)}});
        }
        return a;
    };
    nlohmann::json j;
    j["coop_ok"] = coop_ok();
    j["group_lasso_ok"] = group_lasso_ok();
    j["coop"] = rows(coop);
    j["group_lasso"] = rows(group_lasso);
    return j.dump(2);
}

Vector weighting_diagonal(const VectorRef& beta, const GroupPartition& partition)
{
    if (beta.size() != partition.dim()) throw Error(ErrorCode::DimensionMismatch, "beta length differs from partition");
    Vector d = Vector::Zero(beta.size());
    for (Index k = 0; k < partition.num_groups(); ++k) {
        const Vector b = partition.gather(beta, k);
        const auto& m = partition.members(k);
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (b[static_cast<Index>(i)] != 0.0) {
                d[m[i]] = partition.weight(k) / phi_norm(b, static_cast<Index>(i));
            }
        }
    }
    return d;
}

Vector group_weighting_diagonal(const VectorRef& beta, const GroupPartition& partition)
{
    if (beta.size() != partition.dim()) throw Error(ErrorCode::DimensionMismatch, "beta length differs from partition");
    Vector d = Vector::Zero(beta.size());
    for (Index k = 0; k < partition.num_groups(); ++k) {
        const double norm = partition.gather(beta, k).norm();
        if (norm == 0.0) continue;
        for (Index j : partition.members(k)) {
            if (beta[j] != 0.0) d[j] = partition.weight(k) / norm;
        }
    }
    return d;
}

namespace {

// R = Psi_{., S} Psi_SS^{-1} D beta_S over all rows; rows in S are not used.
Vector representer(const TruthSpec& truth, const std::vector<Index>& support, const Vector& d)
{
    const Index p = truth.psi.rows();
    const auto s = static_cast<Index>(support.size());
    if (s == 0) return Vector::Zero(p);
    Matrix pss(s, s);
    Matrix pcs(p, s);
    Vector db(s);
    for (Index a = 0; a < s; ++a) {
        db[a] = d[support[a]] * truth.beta_star[support[a]];
        for (Index b = 0; b < s; ++b) pss(a, b) = truth.psi(support[a], support[b]);
        for (Index j = 0; j < p; ++j) pcs(j, a) = truth.psi(j, support[a]);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(pss, Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().cwiseAbs().maxCoeff();
    if (!(es.eigenvalues().minCoeff() > 1e-12 * std::max(1.0, top))) {
        throw Error(ErrorCode::SingularSupportBlock, "Psi restricted to the support is not invertible");
    }
    return pcs * pss.ldlt().solve(db);
}

} // namespace

IrrepReport check_assumptions(const TruthSpec& truth)
{
    const Index p = truth.psi.rows();
    if (truth.psi.cols() != p || truth.beta_star.size() != p || truth.partition.dim() != p) {
        throw Error(ErrorCode::DimensionMismatch, "truth dimensions disagree");
    }
    const GroupPartition& part = truth.partition;
    const Vector& beta = truth.beta_star;

    std::vector<Index> support;
    for (Index j = 0; j < p; ++j) {
        if (beta[j] != 0.0) support.push_back(j);
    }
    const Vector r_coop = representer(truth, support, weighting_diagonal(beta, part));
    const Vector r_group = representer(truth, support, group_weighting_diagonal(beta, part));

    IrrepReport rep;
    for (Index k = 0; k < part.num_groups(); ++k) {
        const auto& m = part.members(k);
        const double w = part.weight(k);
        bool has_pos = false;
        bool has_neg = false;
        Index zeros = 0;
        for (Index j : m) {
            has_pos |= beta[j] > 0;
            has_neg |= beta[j] < 0;
            zeros += beta[j] == 0.0;
        }

        GroupIrrep c;
        c.margin = kNaN;
        c.sign_slack = kNaN;
        if (zeros == 0) {
            c.status = IrrepStatus::full;
        } else if (has_pos && has_neg) {
            c.status = IrrepStatus::sign_incoherent_violation;
        } else {
            Vector r(zeros);
            Index i = 0;
            for (Index j : m) {
                if (beta[j] == 0.0) r[i++] = r_coop[j];
            }
            const double lhs = std::max(positive_part(r).norm(), negative_part(r).norm()) / w;
            c.margin = 1.0 - lhs;
            const bool norm_ok = c.margin > kIrrepSlack;
            if (!has_pos && !has_neg) {
                c.status = norm_ok ? IrrepStatus::excluded_ok : IrrepStatus::excluded_fail;
            } else {
                const double nu = has_pos ? 1.0 : -1.0;
                c.sign_slack = (nu * r).maxCoeff();
                const bool sign_ok = c.sign_slack <= kIrrepSlack;
                if (!norm_ok) c.status = IrrepStatus::intersect_fail_norm;
                else if (!sign_ok) c.status = IrrepStatus::intersect_fail_sign;
                else c.status = IrrepStatus::intersect_ok;
            }
        }
        rep.coop.push_back(c);

        GroupIrrep g;
        g.margin = kNaN;
        g.sign_slack = kNaN;
        if (zeros == 0) {
            g.status = IrrepStatus::full;
        } else if (zeros < static_cast<Index>(m.size())) {
            // The group-Lasso cannot select part of a group.
            g.status = IrrepStatus::intersect_fail_norm;
        } else {
            double sq = 0.0;
            for (Index j : m) sq += r_group[j] * r_group[j];
            g.margin = 1.0 - std::sqrt(sq) / w;
            g.status = g.margin > kIrrepSlack ? IrrepStatus::excluded_ok : IrrepStatus::excluded_fail;
        }
        rep.group_lasso.push_back(g);
    }
    return rep;
}

Matrix sample_gaussian(const MatrixRef& chol_lower, Index n, std::uint64_t seed)
{
    const Index p = chol_lower.rows();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix z(n, p);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < p; ++j) z(i, j) = normal(rng);
    }
    return z * chol_lower.transpose();
}

RecoveryResult empirical_recovery(const TruthSpec& truth, Family family, const RecoveryOptions& options)
{
    truth.validate();
    if (options.replicates < 1) throw Error(ErrorCode::InvalidArgument, "need at least one replicate");
    if (options.n < 2) throw Error(ErrorCode::InvalidArgument, "need at least two observations");
    if (!(options.sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be nonnegative");

    const Index p = truth.psi.rows();
    const Matrix chol = truth.psi.llt().matrixL();
    const PenaltySpec spec(family, truth.partition, options.sgl_alpha);
    const bool append_zero = options.include_unpenalized && options.n > p + 1;

    struct Rep
    {
        bool recovered = false;
        double sign_error = 0.0;
        double rmse = 0.0;
        bool unpenalized = false;
    };
    std::vector<Rep> reps(static_cast<std::size_t>(options.replicates));

    parallel_for(options.replicates, options.jobs, [&](std::int64_t r) {
        const auto ur = static_cast<std::uint64_t>(r);
        const Matrix X = sample_gaussian(chol, options.n, derive_seed(options.seed, 1, ur));
        std::mt19937_64 rng(derive_seed(options.seed, 2, ur));
        std::normal_distribution<double> normal(0.0, 1.0);
        Vector y = X * truth.beta_star;
        for (Index i = 0; i < options.n; ++i) y[i] += options.sigma * normal(rng);

        const Dataset data = prepare(X, y);
        std::vector<double> grid = lambda_grid(lambda_max(data, spec), options.n_lambda, options.lambda_min_ratio);
        if (append_zero) grid.push_back(0.0);
        PathResult pr = path(data, spec, grid, options.solver);

        Rep out;
        for (const auto& f : pr.fits) {
            bool same = true;
            for (Index j = 0; j < p && same; ++j) same = sign_of(f.beta[j]) == sign_of(truth.beta_star[j]);
            out.recovered |= same;
        }

        // Noiseless data: the least penalized fit stands in for the selection.
        auto chosen = static_cast<Index>(pr.fits.size()) - 1;
        if (options.sigma > 0.0) {
            if (family == Family::sgl) {
                CvOptions cv;
                cv.seed = derive_seed(options.seed, 3, ur);
                cv.solver = options.solver;
                const SelectionReport rep = cross_validate(X, y, data.loss, spec, grid, cv);
                chosen = *rep.cv_min_index;
            } else {
                InformationOptions info;
                if (options.known_sigma) info.sigma2 = options.sigma * options.sigma;
                const SelectionReport rep = information_criteria(data, pr, info);
                chosen = *rep.bic_index;
            }
        }
        const Vector& b = pr.fits[static_cast<std::size_t>(chosen)].beta;
        Index wrong = 0;
        for (Index j = 0; j < p; ++j) wrong += sign_of(b[j]) != sign_of(truth.beta_star[j]);
        out.sign_error = static_cast<double>(wrong) / static_cast<double>(p);
        out.rmse = std::sqrt((b - truth.beta_star).squaredNorm() / static_cast<double>(p));
        out.unpenalized = chosen == static_cast<Index>(pr.fits.size()) - 1;
        reps[static_cast<std::size_t>(r)] = out;
    });

    RecoveryResult res;
    res.family = family;
    res.replicates = options.replicates;
    const double R = static_cast<double>(options.replicates);
    double ss = 0.0;
    for (const Rep& r : reps) {
        res.recovery_frequency += r.recovered;
        res.mean_sign_error += r.sign_error;
        res.mean_rmse += r.rmse;
        res.bic_selects_unpenalized += r.unpenalized;
    }
    res.recovery_frequency /= R;
    res.mean_sign_error /= R;
    res.mean_rmse /= R;
    res.bic_selects_unpenalized /= R;
    for (const Rep& r : reps) ss += (r.sign_error - res.mean_sign_error) * (r.sign_error - res.mean_sign_error);
    res.sign_error_se = options.replicates > 1 ? std::sqrt(ss / (R - 1.0) / R) : 0.0;
    return res;
}

Matrix illustration_psi(double cross, double within, double cross2, double zero_pair)
{
    if (!(within > -1.0 && within < 1.0)) throw Error(ErrorCode::InvalidArgument, "within must lie in (-1, 1)");
    Matrix psi = Matrix::Identity(8, 8);
    psi(0, 1) = psi(1, 0) = within;
    psi(2, 3) = psi(3, 2) = within;
    for (Index j : {0, 1}) psi(4, j) = psi(j, 4) = cross;
    for (Index j : {2, 3}) psi(5, j) = psi(j, 5) = cross;
    for (Index j : {0, 1}) psi(6, j) = psi(j, 6) = cross2;
    for (Index j : {2, 3}) psi(7, j) = psi(j, 7) = cross2;
    const double shared = 2.0 * cross * cross2 / (1.0 + within);
    psi(4, 6) = psi(6, 4) = shared;
    psi(5, 7) = psi(7, 5) = shared;
    psi(4, 5) = psi(5, 4) = zero_pair;
    psi(6, 7) = psi(7, 6) = zero_pair;
    Eigen::SelfAdjointEigenSolver<Matrix> es(psi, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "illustration parameters give a covariance that is not positive definite");
    }
    return psi;
}

TruthSpec illustration_truth()
{
    TruthSpec t;
    t.psi = illustration_psi(kIllustrationCross, kIllustrationWithin, kIllustrationCross2, kIllustrationZeroPair);
    t.beta_star.resize(8);
    t.beta_star << 1, 1, -1, -1, 0, 0, 0, 0;
    t.partition = GroupPartition::contiguous({2, 2, 2, 2});
    return t;
}

RecoveryOptions illustration_options()
{
    RecoveryOptions o;
    o.n = 20;
    o.sigma = 0.1;
    o.n_lambda = 50;
    o.lambda_min_ratio = 3e-3;
    return o;
}

TruthSpec parse_truth_json(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("truth file: ") + e.what());
    }
    try {
        TruthSpec t;
        const auto beta = j.at("beta_star").get<std::vector<double>>();
        const auto p = static_cast<Index>(beta.size());
        t.beta_star = Eigen::Map<const Vector>(beta.data(), p);

        const auto& jp = j.at("psi");
        std::vector<double> flat;
        if (!jp.empty() && jp.front().is_array()) {
            for (const auto& row : jp) {
                const auto r = row.get<std::vector<double>>();
                if (static_cast<Index>(r.size()) != p) throw Error(ErrorCode::DimensionMismatch, "psi row length differs from p");
                flat.insert(flat.end(), r.begin(), r.end());
            }
        } else {
            flat = jp.get<std::vector<double>>();
        }
        if (static_cast<Index>(flat.size()) != p * p) throw Error(ErrorCode::DimensionMismatch, "psi must hold p*p entries");
        t.psi = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(flat.data(), p, p);

        std::vector<std::vector<Index>> groups;
        if (j.contains("groups")) {
            for (const auto& g : j.at("groups")) {
                std::vector<Index> members;
                for (const auto& v : g) {
                    const auto idx = v.get<long long>();
                    if (idx < 1) throw Error(ErrorCode::InvalidArgument, "group indices are 1-based");
                    members.push_back(static_cast<Index>(idx - 1));
                }
                groups.push_back(std::move(members));
            }
        }
        std::vector<double> weights;
        if (j.contains("weights")) weights = j.at("weights").get<std::vector<double>>();
        t.partition = groups.empty() ? GroupPartition::singletons(p) : GroupPartition::validate(groups, weights, p);
        t.validate();
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("truth file: ") + e.what());
    }
}

std::string truth_to_json(const TruthSpec& truth)
{
    nlohmann::json j;
    const Index p = truth.psi.rows();
    nlohmann::json psi = nlohmann::json::array();
    for (Index i = 0; i < p; ++i) {
        std::vector<double> row;
        for (Index c = 0; c < p; ++c) row.push_back(truth.psi(i, c));
        psi.push_back(row);
    }
    j["psi"] = psi;
    j["beta_star"] = std::vector<double>(truth.beta_star.data(), truth.beta_star.data() + truth.beta_star.size());
    nlohmann::json groups = nlohmann::json::array();
    for (Index k = 0; k < truth.partition.num_groups(); ++k) {
        nlohmann::json g = nlohmann::json::array();
        for (Index m : truth.partition.members(k)) g.push_back(m + 1);
        groups.push_back(g);
    }
    j["groups"] = groups;
    j["weights"] = truth.partition.weights();
    return j.dump(2);
}

} // namespace coopreg
