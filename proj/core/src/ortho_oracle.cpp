#include <coopreg/ortho_oracle.hpp>
#include <coopreg/error.hpp>

#include <cmath>

namespace coopreg::ortho {

namespace {

double shrink_factor(double threshold, double norm)
{
    if (norm <= 0.0) return 0.0;
    const double f = 1.0 - threshold / norm;
    return f > 0.0 ? f : 0.0;
}

void check(const VectorRef& beta_ols, const GroupPartition& partition)
{
    if (beta_ols.size() != partition.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "OLS vector and partition dimensions differ");
    }
}

} // namespace

Vector coop_closed_form(const VectorRef& beta_ols, double lambda, const GroupPartition& partition)
{
    check(beta_ols, partition);
    Vector out = Vector::Zero(beta_ols.size());
    for (Index k = 0; k < partition.num_groups(); ++k) {
        const Vector g = partition.gather(beta_ols, k);
        const auto& m = partition.members(k);
        for (Index i = 0; i < g.size(); ++i) {
            out[m[i]] = shrink_factor(lambda * partition.weight(k), phi_norm(g, i)) * g[i];
        }
    }
    return out;
}

Vector group_closed_form(const VectorRef& beta_ols, double lambda, const GroupPartition& partition)
{
    check(beta_ols, partition);
    Vector out = Vector::Zero(beta_ols.size());
    for (Index k = 0; k < partition.num_groups(); ++k) {
        const Vector g = partition.gather(beta_ols, k);
        const double f = shrink_factor(lambda * partition.weight(k), g.norm());
        for (Index j : partition.members(k)) out[j] = f * beta_ols[j];
    }
    return out;
}

Vector lasso_closed_form(const VectorRef& beta_ols, double lambda)
{
    Vector out(beta_ols.size());
    for (Index j = 0; j < beta_ols.size(); ++j) {
        out[j] = shrink_factor(lambda, std::abs(beta_ols[j])) * beta_ols[j];
    }
    return out;
}

Vector sgl_closed_form(const VectorRef& beta_ols, double lambda, double alpha, const GroupPartition& partition)
{
    const Vector intermediate = lasso_closed_form(beta_ols, lambda * alpha);
    return group_closed_form(intermediate, lambda * (1.0 - alpha), partition);
}

Vector closed_form(const VectorRef& beta_ols, double lambda, const PenaltySpec& spec)
{
    switch (spec.family) {
        case Family::lasso: return lasso_closed_form(beta_ols, lambda);
        case Family::group: return group_closed_form(beta_ols, lambda, spec.partition);
        case Family::sgl: return sgl_closed_form(beta_ols, lambda, spec.alpha, spec.partition);
        case Family::coop: return coop_closed_form(beta_ols, lambda, spec.partition);
    }
    return Vector();
}

std::vector<ShrinkPoint> shrinkage_surface(Family family, double lambda, double weight, double alpha,
                                           double range, Index steps)
{
    if (steps < 2) throw Error(ErrorCode::InvalidArgument, "need at least two grid steps per axis");
    if (!(weight > 0)) throw Error(ErrorCode::NonPositiveWeight, "weight must be positive");
    const GroupPartition part = GroupPartition::validate({{0, 1}}, {weight}, 2);
    const PenaltySpec spec(family, part, alpha);
    std::vector<ShrinkPoint> out;
    out.reserve(static_cast<std::size_t>(steps * steps));
    for (Index a = 0; a < steps; ++a) {
        const double o1 = -range + 2.0 * range * static_cast<double>(a) / static_cast<double>(steps - 1);
        for (Index b = 0; b < steps; ++b) {
            const double o2 = -range + 2.0 * range * static_cast<double>(b) / static_cast<double>(steps - 1);
            Vector ols(2);
            ols << o1, o2;
            const Vector est = closed_form(ols, lambda, spec);
            out.push_back({o1, o2, est[0], est[1]});
        }
    }
    return out;
}

} // namespace coopreg::ortho
