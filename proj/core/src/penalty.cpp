#include <coopreg/penalty.hpp>
#include <coopreg/error.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace coopreg {

std::string_view to_string(Family family) noexcept
{
    switch (family) {
        case Family::lasso: return "lasso";
        case Family::group: return "group";
        case Family::sgl: return "sgl";
        case Family::coop: return "coop";
    }
    return "unknown";
}

Family parse_family(std::string_view name)
{
    if (name == "lasso") return Family::lasso;
    if (name == "group") return Family::group;
    if (name == "sgl") return Family::sgl;
    if (name == "coop") return Family::coop;
    throw Error(ErrorCode::InvalidArgument, "unknown penalty family '" + std::string(name) + "'");
}

PenaltySpec::PenaltySpec(Family f, GroupPartition g, double a)
    : family(f)
    , alpha(a)
    , partition(std::move(g))
{
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0, 1]");
    }
}

namespace {

void check_dim(const VectorRef& v, const PenaltySpec& spec, const char* what)
{
    if (v.size() != spec.dim()) {
        throw Error(ErrorCode::DimensionMismatch, std::string(what) + " has length " +
                                                      std::to_string(v.size()) + ", expected " +
                                                      std::to_string(spec.dim()));
    }
}

double pos_norm(const Vector& v) { return v.cwiseMax(0.0).norm(); }
double neg_norm(const Vector& v) { return v.cwiseMin(0.0).norm(); }

} // namespace

double norm_value(const VectorRef& v, const PenaltySpec& spec)
{
    check_dim(v, spec, "vector");
    const auto& part = spec.partition;
    switch (spec.family) {
        case Family::lasso:
            return v.lpNorm<1>();
        case Family::group: {
            double s = 0.0;
            for (Index k = 0; k < part.num_groups(); ++k) s += part.weight(k) * part.gather(v, k).norm();
            return s;
        }
        case Family::sgl: {
            double s = 0.0;
            for (Index k = 0; k < part.num_groups(); ++k) s += part.weight(k) * part.gather(v, k).norm();
            return spec.alpha * v.lpNorm<1>() + (1.0 - spec.alpha) * s;
        }
        case Family::coop: {
            double s = 0.0;
            for (Index k = 0; k < part.num_groups(); ++k) {
                const Vector g = part.gather(v, k);
                s += part.weight(k) * (pos_norm(g) + neg_norm(g));
            }
            return s;
        }
    }
    return 0.0;
}

Vector group_shrink(const VectorRef& v, double t)
{
    const double nrm = v.norm();
    if (nrm <= t) return Vector::Zero(v.size());
    return (1.0 - t / nrm) * v;
}

Vector soft_threshold(const VectorRef& v, double t)
{
    Vector out(v.size());
    for (Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]) - t;
        out[i] = a > 0 ? std::copysign(a, v[i]) : 0.0;
    }
    return out;
}

Vector prox(const VectorRef& v, double t, const PenaltySpec& spec)
{
    check_dim(v, spec, "vector");
    if (t < 0) throw Error(ErrorCode::InvalidArgument, "prox step must be nonnegative");
    if (t == 0) return v;

    const auto& part = spec.partition;
    if (spec.family == Family::lasso) return soft_threshold(v, t);

    Vector out(v.size());
    for (Index k = 0; k < part.num_groups(); ++k) {
        const auto& idx = part.members(k);
        const double tw = t * part.weight(k);
        const Vector g = part.gather(v, k);
        Vector r;
        switch (spec.family) {
            case Family::group:
                r = group_shrink(g, tw);
                break;
            case Family::sgl:
                r = group_shrink(soft_threshold(g, t * spec.alpha), tw * (1.0 - spec.alpha));
                break;
            case Family::coop:
                r = group_shrink(g.cwiseMax(0.0), tw) + group_shrink(g.cwiseMin(0.0), tw);
                break;
            case Family::lasso:
                break;
        }
        for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] = r[static_cast<Index>(i)];
    }
    return out;
}

KktReport subdifferential_contains_zero(const VectorRef& beta,
                                        const VectorRef& gradient,
                                        double lambda,
                                        const PenaltySpec& spec)
{
    check_dim(beta, spec, "beta");
    check_dim(gradient, spec, "gradient");
    const auto& part = spec.partition;
    const Index K = part.num_groups();

    KktReport rep;
    rep.per_group_scores.assign(static_cast<std::size_t>(K), {0.0, 0.0});

    double best_raw = -1.0;
    auto consider = [&](double raw, Index k, Orthant o) {
        // Ties go to the positive orthant, then to the lower group index.
        if (raw > best_raw) {
            best_raw = raw;
            rep.violating_group = k;
            rep.violating_orthant = o;
        }
    };

    for (Index k = 0; k < K; ++k) {
        const Vector b = part.gather(beta, k);
        const Vector g = part.gather(gradient, k);
        const double w = spec.family == Family::lasso ? 1.0 : part.weight(k);
        const double scale = std::max(1.0, lambda * w);
        double support = 0.0;
        double zero = 0.0;
        double gp = 0.0;
        double gm = 0.0;

        switch (spec.family) {
            case Family::coop: {
                const double bp = pos_norm(b);
                const double bm = neg_norm(b);
                for (Index j = 0; j < b.size(); ++j) {
                    if (b[j] != 0.0) {
                        const double denom = b[j] > 0 ? bp : bm;
                        support = std::max(support, std::abs(g[j] + lambda * w * b[j] / denom));
                    } else {
                        zero = std::max(zero, std::max(0.0, phi_norm(g, j) - lambda * w));
                    }
                }
                if (bp == 0.0) gp = std::max(0.0, neg_norm(g) - lambda * w);
                if (bm == 0.0) gm = std::max(0.0, pos_norm(g) - lambda * w);
                break;
            }
            case Family::group: {
                const double nb = b.norm();
                if (nb > 0) {
                    support = (g + (lambda * w / nb) * b).lpNorm<Eigen::Infinity>();
                } else {
                    zero = std::max(0.0, g.norm() - lambda * w);
                    gp = gm = zero;
                }
                break;
            }
            case Family::sgl: {
                const double a = spec.alpha;
                const double nb = b.norm();
                if (nb > 0) {
                    for (Index j = 0; j < b.size(); ++j) {
                        if (b[j] != 0.0) {
                            const double sgn = b[j] > 0 ? 1.0 : -1.0;
                            support = std::max(support, std::abs(g[j] + lambda * a * sgn +
                                                                 lambda * (1 - a) * w * b[j] / nb));
                        } else {
                            zero = std::max(zero, std::max(0.0, std::abs(g[j]) - lambda * a));
                        }
                    }
                } else {
                    zero = std::max(0.0, soft_threshold(g, lambda * a).norm() - lambda * (1 - a) * w);
                    gp = gm = zero;
                }
                break;
            }
            case Family::lasso: {
                for (Index j = 0; j < b.size(); ++j) {
                    if (b[j] != 0.0) {
                        const double sgn = b[j] > 0 ? 1.0 : -1.0;
                        support = std::max(support, std::abs(g[j] + lambda * sgn));
                    } else {
                        const double v = std::max(0.0, std::abs(g[j]) - lambda);
                        zero = std::max(zero, v);
                        if (g[j] < 0) gp = std::max(gp, v);
                        else gm = std::max(gm, v);
                    }
                }
                break;
            }
        }

        rep.per_group_scores[k] = {gp, gm};
        rep.support_residual = std::max(rep.support_residual, support / scale);
        rep.zero_violation = std::max(rep.zero_violation, zero / scale);
    }
    for (Index k = 0; k < K; ++k) consider(rep.per_group_scores[k].first, k, Orthant::positive);
    for (Index k = 0; k < K; ++k) consider(rep.per_group_scores[k].second, k, Orthant::negative);
    rep.max_violation = std::max(rep.support_residual, rep.zero_violation);
    return rep;
}

double coop_group_score(const VectorRef& c_group, double weight)
{
    return std::max(c_group.cwiseMax(0.0).norm(), c_group.cwiseMin(0.0).norm()) / weight;
}

namespace {

// Smallest lambda with |S_{lambda alpha}(c)| <= lambda (1 - alpha) w.
double sgl_group_threshold(const Vector& c, double alpha, double w)
{
    const double cmax = c.lpNorm<Eigen::Infinity>();
    if (cmax == 0.0) return 0.0;
    if (alpha <= 0.0) return c.norm() / w;
    if (alpha >= 1.0) return cmax;
    auto excess = [&](double lam) {
        return soft_threshold(c, lam * alpha).norm() - lam * (1.0 - alpha) * w;
    };
    double lo = 0.0;
    double hi = cmax / alpha;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (excess(mid) > 0) lo = mid;
        else hi = mid;
    }
    return hi;
}

} // namespace

double lambda_max_from_gradient(const VectorRef& gradient_at_zero, const PenaltySpec& spec)
{
    check_dim(gradient_at_zero, spec, "gradient");
    const auto& part = spec.partition;
    if (spec.family == Family::lasso) {
        return gradient_at_zero.size() ? gradient_at_zero.lpNorm<Eigen::Infinity>() : 0.0;
    }
    double lmax = 0.0;
    for (Index k = 0; k < part.num_groups(); ++k) {
        const Vector c = part.gather(gradient_at_zero, k);
        const double w = part.weight(k);
        double score = 0.0;
        switch (spec.family) {
            case Family::group: score = c.norm() / w; break;
            case Family::coop: score = coop_group_score(c, w); break;
            case Family::sgl: score = sgl_group_threshold(c, spec.alpha, w); break;
            case Family::lasso: break;
        }
        lmax = std::max(lmax, score);
    }
    return lmax;
}

} // namespace coopreg
