#include <coopreg/solver.hpp>
#include <coopreg/error.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace coopreg {

ActiveSets ActiveSets::empty(Index p)
{
    ActiveSets a;
    a.plus.assign(static_cast<std::size_t>(p), false);
    a.minus.assign(static_cast<std::size_t>(p), false);
    return a;
}

ActiveSets ActiveSets::from_beta(const VectorRef& beta, const PenaltySpec& spec)
{
    const auto& part = spec.partition;
    ActiveSets a = empty(beta.size());
    if (spec.family == Family::lasso) {
        for (Index j = 0; j < beta.size(); ++j) {
            if (beta[j] != 0.0) a.plus[j] = a.minus[j] = true;
        }
        return a;
    }
    for (Index k = 0; k < part.num_groups(); ++k) {
        bool has_pos = false;
        bool has_neg = false;
        for (Index j : part.members(k)) {
            has_pos = has_pos || beta[j] > 0;
            has_neg = has_neg || beta[j] < 0;
        }
        if (spec.family != Family::coop) {
            has_pos = has_neg = has_pos || has_neg;
        }
        for (Index j : part.members(k)) {
            a.plus[j] = has_pos;
            a.minus[j] = has_neg;
        }
    }
    return a;
}

Index ActiveSets::count() const
{
    Index c = 0;
    for (std::size_t j = 0; j < plus.size(); ++j) c += (plus[j] || minus[j]) ? 1 : 0;
    return c;
}

double penalized_objective(const Dataset& data, const PenaltySpec& spec, double lambda,
                           const VectorRef& beta, double intercept)
{
    return loss_value(data, beta, intercept) + lambda * norm_value(beta, spec);
}

Vector smooth_gradient(const Dataset& data, const VectorRef& beta, double intercept)
{
    return loss_and_gradient(data, beta, intercept).gradient;
}

double lambda_max(const Dataset& data, const PenaltySpec& spec)
{
    if (data.p() != spec.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "dataset and penalty dimensions differ");
    }
    if (data.p() == 0) return 0.0;
    const Vector zero = Vector::Zero(data.p());
    const Vector grad = smooth_gradient(data, zero, null_intercept(data));
    return lambda_max_from_gradient(grad, spec);
}

KktReport certify(const Dataset& data, const PenaltySpec& spec, const FitResult& fit)
{
    return subdifferential_contains_zero(fit.beta, smooth_gradient(data, fit.beta, fit.intercept),
                                         fit.lambda, spec);
}

// Compact coordinates of the active sets, one segment per active block.
struct ActiveSetSolver::Layout
{
    struct Segment
    {
        Index start = 0;
        Index len = 0;
        double weight = 1.0;
        bool pos = true;
        bool neg = true;
    };

    std::vector<Index> coords;
    std::vector<Segment> segments;

    Layout(const ActiveSets& active, const PenaltySpec& spec)
    {
        const auto& part = spec.partition;
        if (spec.family == Family::lasso) {
            for (Index j = 0; j < part.dim(); ++j) {
                if (!active.is_active(j)) continue;
                segments.push_back({static_cast<Index>(coords.size()), 1, 1.0, active.plus[j], active.minus[j]});
                coords.push_back(j);
            }
            return;
        }
        for (Index k = 0; k < part.num_groups(); ++k) {
            const auto& m = part.members(k);
            const bool pos = active.plus[m.front()];
            const bool neg = active.minus[m.front()];
            if (!pos && !neg) continue;
            segments.push_back({static_cast<Index>(coords.size()), static_cast<Index>(m.size()),
                                part.weight(k), pos, neg});
            coords.insert(coords.end(), m.begin(), m.end());
        }
    }

    Index size() const { return static_cast<Index>(coords.size()); }
};

// Restricted smooth loss on the compact active coordinates.
struct ActiveSetSolver::Workspace
{
    const ActiveSetSolver& solver;
    const Layout& layout;
    Matrix gram;
    Vector xty;
    Matrix X;

    Workspace(const ActiveSetSolver& s, const Layout& l)
        : solver(s)
        , layout(l)
    {
        const Index a = layout.size();
        if (solver.has_gram_) {
            gram.resize(a, a);
            xty.resize(a);
            for (Index c = 0; c < a; ++c) {
                xty[c] = solver.xty_[layout.coords[c]];
                for (Index r = 0; r < a; ++r) gram(r, c) = solver.gram_(layout.coords[r], layout.coords[c]);
            }
        } else {
            X.resize(solver.data_.n(), a);
            for (Index c = 0; c < a; ++c) X.col(c) = solver.data_.X.col(layout.coords[c]);
        }
    }

    // Returns the loss; fills gradient and intercept gradient when requested.
    double eval(const Vector& z, double b0, Vector* grad, double* grad_b0) const
    {
        const Dataset& d = solver.data_;
        if (solver.has_gram_) {
            const Vector gz = gram * z;
            if (grad) *grad = gz - xty;
            if (grad_b0) *grad_b0 = 0.0;
            return 0.5 * z.dot(gz) - xty.dot(z) + 0.5 * solver.yty_;
        }
        if (!solver.logistic_) {
            const Vector r = X * z - d.y;
            if (grad) *grad = X.transpose() * r;
            if (grad_b0) *grad_b0 = 0.0;
            return 0.5 * r.squaredNorm();
        }
        Vector eta = X * z;
        eta.array() += b0;
        double value = 0.0;
        Vector resid(d.n());
        for (Index i = 0; i < d.n(); ++i) {
            const double e = std::clamp(eta[i], -kEtaClamp, kEtaClamp);
            value += log1p_exp(e) - d.y[i] * e;
            resid[i] = sigmoid(e) - d.y[i];
        }
        if (!std::isfinite(value)) throw Error(ErrorCode::NonFiniteLoss, "logistic loss overflow");
        if (grad) *grad = X.transpose() * resid;
        if (grad_b0) *grad_b0 = solver.fit_intercept_ ? resid.sum() : 0.0;
        return value;
    }

    double lipschitz() const
    {
        const Index a = layout.size();
        const bool with_b0 = solver.logistic_ && solver.fit_intercept_;
        const double scale = solver.logistic_ ? 0.25 : 1.0;
        if (a == 0) return with_b0 ? scale * static_cast<double>(solver.data_.n()) : 1.0;
        auto apply = [&](const Vector& v) -> Vector {
            if (solver.has_gram_) return gram * v;
            return X.transpose() * (X * v);
        };
        Vector v = Vector::Ones(a) / std::sqrt(static_cast<double>(a));
        double est = 0.0;
        for (int it = 0; it < 60; ++it) {
            Vector hv = apply(v);
            const double nrm = hv.norm();
            if (nrm == 0.0) break;
            const double prev = est;
            est = nrm;
            v = hv / nrm;
            if (std::abs(est - prev) <= 1e-6 * est) break;
        }
        if (est == 0.0) est = 1.0;
        est *= 1.02;
        if (with_b0) est = std::max(est, static_cast<double>(solver.data_.n()));
        return scale * est;
    }
};

ActiveSetSolver::ActiveSetSolver(const Dataset& data, const PenaltySpec& spec, SolverOptions options)
    : data_(data)
    , spec_(spec)
    , options_(options)
    , logistic_(data.loss.kind == LossKind::logistic)
    , fit_intercept_(data.loss.kind == LossKind::logistic && data.loss.includes_intercept)
{
    if (data.p() != spec.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "dataset has " + std::to_string(data.p()) +
                                                      " columns, penalty covers " + std::to_string(spec.dim()));
    }
    if (!logistic_ && data.p() <= options_.gram_limit && data.p() > 0) {
        gram_ = data.X.transpose() * data.X;
        xty_ = data.X.transpose() * data.y;
        yty_ = data.y.squaredNorm();
        has_gram_ = true;
    }
}

Vector ActiveSetSolver::full_gradient(const VectorRef& beta, double intercept) const
{
    if (has_gram_) {
        Vector g = -xty_;
        for (Index j = 0; j < beta.size(); ++j) {
            if (beta[j] != 0.0) g.noalias() += beta[j] * gram_.col(j);
        }
        return g;
    }
    return loss_and_gradient(data_, beta, intercept).gradient;
}

namespace {

double segment_penalty(const Vector& v, Family family, double alpha, double w)
{
    switch (family) {
        case Family::lasso: return v.lpNorm<1>();
        case Family::group: return w * v.norm();
        case Family::sgl: return alpha * v.lpNorm<1>() + (1 - alpha) * w * v.norm();
        case Family::coop: return w * (v.cwiseMax(0.0).norm() + v.cwiseMin(0.0).norm());
    }
    return 0.0;
}

} // namespace

SubproblemResult ActiveSetSolver::solve_active_subproblem(double lambda,
                                                          ActiveSets& active,
                                                          const VectorRef& beta_init,
                                                          double intercept_init,
                                                          double inner_tol) const
{
    const Layout layout(active, spec_);
    const Index a = layout.size();
    const bool with_b0 = fit_intercept_;
    const Family family = spec_.family;
    const double alpha = spec_.alpha;

    SubproblemResult out;
    out.beta = Vector::Zero(data_.p());
    out.intercept = intercept_init;
    if (a == 0 && !with_b0) return out;

    const Workspace ws(*this, layout);

    auto penalty = [&](const Vector& z) {
        double s = 0.0;
        for (const auto& seg : layout.segments) {
            s += segment_penalty(z.segment(seg.start, seg.len), family, alpha, seg.weight);
        }
        return s;
    };
    auto prox_step = [&](const Vector& v, double t) {
        Vector r(v.size());
        for (const auto& seg : layout.segments) {
            const Vector s = v.segment(seg.start, seg.len);
            const double tw = t * lambda * seg.weight;
            switch (family) {
                case Family::lasso:
                    r.segment(seg.start, seg.len) = soft_threshold(s, t * lambda);
                    break;
                case Family::group:
                    r.segment(seg.start, seg.len) = group_shrink(s, tw);
                    break;
                case Family::sgl:
                    r.segment(seg.start, seg.len) =
                        group_shrink(soft_threshold(s, t * lambda * alpha), tw * (1 - alpha));
                    break;
                case Family::coop: {
                    Vector part = Vector::Zero(seg.len);
                    if (seg.pos) part += group_shrink(s.cwiseMax(0.0), tw);
                    if (seg.neg) part += group_shrink(s.cwiseMin(0.0), tw);
                    r.segment(seg.start, seg.len) = part;
                    break;
                }
            }
        }
        return r;
    };

    Vector x(a);
    for (Index c = 0; c < a; ++c) x[c] = beta_init[layout.coords[c]];
    // Project the start onto the orthant constraints.
    if (family == Family::coop) {
        for (const auto& seg : layout.segments) {
            if (!seg.pos) x.segment(seg.start, seg.len) = x.segment(seg.start, seg.len).cwiseMin(0.0);
            if (!seg.neg) x.segment(seg.start, seg.len) = x.segment(seg.start, seg.len).cwiseMax(0.0);
        }
    }
    double bx = intercept_init;

    double L = ws.lipschitz();
    double Fx = ws.eval(x, bx, nullptr, nullptr) + lambda * penalty(x);
    Vector yv = x;
    double by = bx;
    double t = 1.0;
    bool at_restart = true;
    Vector gy;
    double gby = 0.0;
    long it = 0;
    out.converged = false;

    for (; it < options_.max_inner; ++it) {
        const double fy = ws.eval(yv, by, &gy, &gby);
        Vector xn;
        double bn = by;
        double fn = 0.0;
        Vector d;
        double db = 0.0;
        for (int bt = 0;; ++bt) {
            xn = prox_step(yv - gy / L, 1.0 / L);
            if (with_b0) bn = by - gby / L;
            d = xn - yv;
            db = bn - by;
            fn = ws.eval(xn, bn, nullptr, nullptr);
            const double model = fy + gy.dot(d) + gby * db + 0.5 * L * (d.squaredNorm() + db * db);
            if (fn <= model + 1e-13 * std::max(1.0, std::abs(fy))) break;
            if (bt > 60) throw Error(ErrorCode::LineSearchFailure, "backtracking did not find a step");
            L *= 2.0;
        }
        const double grad_map = L * std::max(d.size() ? d.lpNorm<Eigen::Infinity>() : 0.0, std::abs(db));
        const double Fn = fn + lambda * penalty(xn);

        if (grad_map <= inner_tol) {
            if (Fn <= Fx) {
                x = xn;
                bx = bn;
                Fx = Fn;
            }
            out.converged = true;
            ++it;
            break;
        }
        if (Fn > Fx && !at_restart) {
            // Momentum overshoot: restart from the last accepted iterate.
            yv = x;
            by = bx;
            t = 1.0;
            at_restart = true;
            continue;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double mom = (t - 1.0) / t_next;
        yv = xn + mom * (xn - x);
        by = bn + mom * (bn - bx);
        if (Fn <= Fx || at_restart) {
            x = xn;
            bx = bn;
            Fx = std::min(Fx, Fn);
        }
        t = t_next;
        at_restart = false;
    }
    out.iterations = it;

    for (Index c = 0; c < a; ++c) out.beta[layout.coords[c]] = x[c];
    out.intercept = bx;

    // Drop orthant blocks that ended at zero.
    const auto& part = spec_.partition;
    for (const auto& seg : layout.segments) {
        const Vector s = x.segment(seg.start, seg.len);
        const Index first = layout.coords[seg.start];
        const Index block = family == Family::lasso ? first : part.group_of(first);
        auto clear = [&](bool plus_side) {
            for (Index c = seg.start; c < seg.start + seg.len; ++c) {
                (plus_side ? active.plus : active.minus)[layout.coords[c]] = false;
            }
            (plus_side ? out.deactivated_plus : out.deactivated_minus).push_back(block);
        };
        if (family == Family::coop) {
            if (seg.pos && s.maxCoeff() <= 0.0) clear(true);
            if (seg.neg && s.minCoeff() >= 0.0) clear(false);
        } else if (s.isZero(0.0)) {
            clear(true);
            clear(false);
        }
    }
    return out;
}

FitResult ActiveSetSolver::fit(double lambda, const std::optional<Vector>& init,
                               std::optional<double> intercept_init) const
{
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw Error(ErrorCode::InvalidArgument, "lambda must be finite and nonnegative");
    }
    const Index p = data_.p();
    const auto& part = spec_.partition;
    const double tol = options_.tol;

    FitResult res;
    res.lambda = lambda;
    res.beta = init ? *init : Vector::Zero(p);
    if (res.beta.size() != p) throw Error(ErrorCode::DimensionMismatch, "initial beta has wrong length");
    res.intercept = intercept_init.value_or(null_intercept(data_));
    res.active = ActiveSets::from_beta(res.beta, spec_);

    if (p == 0) {
        res.objective = loss_value(data_, res.beta, res.intercept);
        return res;
    }

    double inner_tol = tol / 10.0;
    bool done = false;
    for (int outer = 1; outer <= options_.max_outer && !done; ++outer) {
        res.outer_iterations = outer;

        // Step 1: restricted smooth problem.
        SubproblemResult sub = solve_active_subproblem(lambda, res.active, res.beta, res.intercept, inner_tol);
        res.beta = std::move(sub.beta);
        res.intercept = sub.intercept;
        res.inner_iterations += sub.iterations;

        // Step 2: most violating inactive block.
        const Vector grad = full_gradient(res.beta, res.intercept);
        double best = 0.0;
        double best_rel = 0.0;
        Index best_block = -1;
        bool best_plus = true;
        auto offer = [&](double raw, double scale, Index block, bool plus_side) {
            if (raw > best) {
                best = raw;
                best_rel = raw / scale;
                best_block = block;
                best_plus = plus_side;
            }
        };
        if (spec_.family == Family::lasso) {
            const double scale = std::max(1.0, lambda);
            for (Index j = 0; j < p; ++j) {
                if (res.active.is_active(j)) continue;
                const double v = std::abs(grad[j]) - lambda;
                if (v > 0) offer(v, scale, j, grad[j] < 0);
            }
        } else {
            for (Index k = 0; k < part.num_groups(); ++k) {
                const auto& m = part.members(k);
                const double w = part.weight(k);
                const double scale = std::max(1.0, lambda * w);
                const Vector g = part.gather(grad, k);
                switch (spec_.family) {
                    case Family::coop:
                        if (!res.active.plus[m.front()]) offer(g.cwiseMin(0.0).norm() - lambda * w, scale, k, true);
                        if (!res.active.minus[m.front()]) offer(g.cwiseMax(0.0).norm() - lambda * w, scale, k, false);
                        break;
                    case Family::group:
                        if (!res.active.plus[m.front()]) offer(g.norm() - lambda * w, scale, k, true);
                        break;
                    case Family::sgl:
                        if (!res.active.plus[m.front()]) {
                            offer(soft_threshold(g, lambda * spec_.alpha).norm() - lambda * (1 - spec_.alpha) * w,
                                  scale, k, true);
                        }
                        break;
                    case Family::lasso:
                        break;
                }
            }
        }

        if (best_block >= 0 && best_rel > tol) {
            auto activate = [&](Index j) {
                if (spec_.family == Family::coop) {
                    (best_plus ? res.active.plus : res.active.minus)[j] = true;
                } else {
                    res.active.plus[j] = res.active.minus[j] = true;
                }
            };
            if (spec_.family == Family::lasso) activate(best_block);
            else for (Index j : part.members(best_block)) activate(j);
            continue;
        }

        // Certificate from the independent checker.
        const KktReport rep = subdifferential_contains_zero(res.beta, grad, lambda, spec_);
        double resid = rep.max_violation;
        if (fit_intercept_) {
            const double gb = loss_and_gradient(data_, res.beta, res.intercept).intercept_gradient;
            resid = std::max(resid, std::abs(gb));
        }
        res.kkt_residual = resid;
        if (resid <= tol) {
            done = true;
        } else if (inner_tol > 1e-15) {
            inner_tol /= 10.0;
        } else {
            break;
        }
    }

    res.status = done ? FitStatus::converged : FitStatus::max_iterations;
    if (!done) {
        const Vector grad = smooth_gradient(data_, res.beta, res.intercept);
        res.kkt_residual = subdifferential_contains_zero(res.beta, grad, lambda, spec_).max_violation;
        if (fit_intercept_) {
            const double gb = loss_and_gradient(data_, res.beta, res.intercept).intercept_gradient;
            res.kkt_residual = std::max(res.kkt_residual, std::abs(gb));
        }
    }

    // Without a penalty and with a rank-deficient design the minimizer is not
    // unique; report it rather than return one of them silently.
    if (lambda == 0.0 && !logistic_) {
        Eigen::ColPivHouseholderQR<Matrix> qr(data_.X);
        if (qr.rank() < p) res.status = FitStatus::max_iterations;
    }

    res.objective = penalized_objective(data_, spec_, lambda, res.beta, res.intercept);
    if (!std::isfinite(res.objective)) throw Error(ErrorCode::NonFiniteLoss, "objective is not finite");
    return res;
}

FitResult fit(const Dataset& data, const PenaltySpec& spec, double lambda, const std::optional<Vector>& init,
              SolverOptions options)
{
    const ActiveSetSolver solver(data, spec, options);
    return solver.fit(lambda, init);
}

double default_lambda_min_ratio(Index n, Index p) { return n > p ? 1e-3 : 1e-2; }

std::vector<double> lambda_grid(double lmax, Index n_lambda, double ratio)
{
    if (n_lambda < 2) throw Error(ErrorCode::InvalidArgument, "n_lambda must be at least 2");
    if (!(ratio > 0.0 && ratio <= 1.0)) throw Error(ErrorCode::InvalidArgument, "lambda_min_ratio must lie in (0, 1]");
    std::vector<double> grid(static_cast<std::size_t>(n_lambda));
    const double step = std::log(ratio) / static_cast<double>(n_lambda - 1);
    for (Index i = 0; i < n_lambda; ++i) grid[i] = lmax * std::exp(step * static_cast<double>(i));
    grid.front() = lmax;
    return grid;
}

PathResult path(const Dataset& data, const PenaltySpec& spec, const PathOptions& options)
{
    const double ratio = options.lambda_min_ratio.value_or(default_lambda_min_ratio(data.n(), data.p()));
    const double lmax = lambda_max(data, spec);
    return path(data, spec, lambda_grid(lmax, options.n_lambda, ratio), options.solver);
}

PathResult path(const Dataset& data, const PenaltySpec& spec, const std::vector<double>& lambdas,
                const SolverOptions& options)
{
    for (std::size_t i = 1; i < lambdas.size(); ++i) {
        if (lambdas[i] > lambdas[i - 1]) throw Error(ErrorCode::InvalidArgument, "lambda grid must be non-increasing");
    }
    PathResult out;
    out.lambdas = lambdas;
    out.spec = spec;
    out.fits.reserve(lambdas.size());
    const ActiveSetSolver solver(data, out.spec, options);
    std::optional<Vector> warm;
    std::optional<double> warm_b0;
    for (double lam : lambdas) {
        FitResult f = solver.fit(lam, warm, warm_b0);
        warm = f.beta;
        warm_b0 = f.intercept;
        out.fits.push_back(std::move(f));
    }
    return out;
}

FitResult reference_fit(const Dataset& data, const PenaltySpec& spec, double lambda, double grad_map_tol,
                        long max_iter)
{
    const Index p = data.p();
    const bool logistic = data.loss.kind == LossKind::logistic;
    const bool with_b0 = logistic && data.loss.includes_intercept;

    double L = 1.0;
    if (p > 0) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(data.X.transpose() * data.X, Eigen::EigenvaluesOnly);
        L = std::max(eig.eigenvalues().maxCoeff(), 1e-12);
    }
    if (with_b0) L = std::max(L, static_cast<double>(data.n()));
    if (logistic) L *= 0.25;

    auto objective = [&](const Vector& b, double b0) { return penalized_objective(data, spec, lambda, b, b0); };

    Vector x = Vector::Zero(p);
    double bx = null_intercept(data);
    Vector yv = x;
    double by = bx;
    double t = 1.0;
    double Fx = objective(x, bx);
    FitResult res;
    res.lambda = lambda;
    res.status = FitStatus::max_iterations;
    long it = 0;
    for (; it < max_iter; ++it) {
        const LossEval ev = loss_and_gradient(data, yv, by);
        const Vector xn = prox(yv - ev.gradient / L, lambda / L, spec);
        const double bn = with_b0 ? by - ev.intercept_gradient / L : by;
        const double gm = L * std::max(p ? (xn - yv).lpNorm<Eigen::Infinity>() : 0.0, std::abs(bn - by));
        const double Fn = objective(xn, bn);
        if (Fn > Fx && t > 1.0) {
            yv = x;
            by = bx;
            t = 1.0;
            continue;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        yv = xn + ((t - 1.0) / t_next) * (xn - x);
        by = bn + ((t - 1.0) / t_next) * (bn - bx);
        x = xn;
        bx = bn;
        Fx = Fn;
        t = t_next;
        if (gm <= grad_map_tol) {
            res.status = FitStatus::converged;
            break;
        }
    }
    res.beta = x;
    res.intercept = bx;
    res.inner_iterations = it;
    res.objective = objective(x, bx);
    res.active = ActiveSets::from_beta(x, spec);
    res.kkt_residual = subdifferential_contains_zero(x, smooth_gradient(data, x, bx), lambda, spec).max_violation;
    return res;
}

} // namespace coopreg
