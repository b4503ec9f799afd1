#include <coopreg/simulate.hpp>
#include <coopreg/error.hpp>
#include <coopreg/io.hpp>
#include <coopreg/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace coopreg {

int wave_width_for_support(Index support_size)
{
    switch (support_size) {
        case 5: return 3;
        case 7: return 4;
        case 9: return 5;
        default:
            throw Error(ErrorCode::InvalidArgument,
                        "support size per group must be 5, 7 or 9, got " + std::to_string(support_size));
    }
}

Index WaveScenario::support_size() const
{
    return (wave_pattern(h, group_size).array() != 0.0).count();
}

std::string WaveScenario::label() const
{
    std::ostringstream s;
    s << "n=" << n << ";support=" << support_size() << ";rho=" << format_number(rho)
      << ";active=" << active_groups << ";flip=" << format_number(sign_flip);
    return s.str();
}

void WaveScenario::validate() const
{
    if (num_groups < 1 || group_size < 1) throw Error(ErrorCode::InvalidArgument, "empty group layout");
    if (h < 1) throw Error(ErrorCode::InvalidArgument, "wave width must be positive");
    if (active_groups < 1 || active_groups > num_groups) {
        throw Error(ErrorCode::InvalidArgument, "active group count out of range");
    }
    if (!(rho > -1.0 && rho < 1.0)) throw Error(ErrorCode::InvalidArgument, "rho must lie in (-1, 1)");
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "need at least two observations");
    if (!(target_r2 > 0.0 && target_r2 < 1.0)) throw Error(ErrorCode::InvalidArgument, "target R2 must lie in (0, 1)");
    if (!(noise_sd > 0.0)) throw Error(ErrorCode::InvalidArgument, "noise sd must be positive");
    if (!(sign_flip >= 0.0 && sign_flip <= 1.0)) throw Error(ErrorCode::InvalidArgument, "sign flip fraction must lie in [0, 1]");
}

Vector wave_pattern(int h, Index size)
{
    Vector w(size);
    const double center = 0.5 * static_cast<double>(size + 1);
    for (Index j = 1; j <= size; ++j) {
        const double a = std::max(0.0, static_cast<double>(h) - std::abs(center - static_cast<double>(j)));
        w[j - 1] = a * a / (static_cast<double>(h) * h);
    }
    return w;
}

Matrix ar1_covariance(Index p, double rho)
{
    Matrix psi(p, p);
    for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) psi(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
    }
    return psi;
}

SimulatedData generate(const WaveScenario& sc)
{
    sc.validate();
    const Index p = sc.p();
    const Index K = sc.num_groups;

    SimulatedData out;
    std::vector<Index> sizes(static_cast<std::size_t>(K), sc.group_size);
    out.partition = GroupPartition::contiguous(sizes);

    std::mt19937_64 data_rng(derive_seed(sc.seed, 1));
    std::mt19937_64 layout_rng(derive_seed(sc.seed, 2));
    std::mt19937_64 flip_rng(derive_seed(sc.seed, 3));
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<Index> order(static_cast<std::size_t>(K));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), layout_rng);
    out.active_groups.assign(order.begin(), order.begin() + sc.active_groups);
    std::sort(out.active_groups.begin(), out.active_groups.end());

    const Vector wave = wave_pattern(sc.h, sc.group_size);
    Vector beta = Vector::Zero(p);
    for (Index k : out.active_groups) beta.segment(k * sc.group_size, sc.group_size) = wave;

    // Population signal variance beta' Psi beta under AR(1) covariance.
    double signal = 0.0;
    for (Index i = 0; i < p; ++i) {
        if (beta[i] == 0.0) continue;
        for (Index j = 0; j < p; ++j) {
            if (beta[j] != 0.0) signal += beta[i] * beta[j] * std::pow(sc.rho, static_cast<double>(std::abs(i - j)));
        }
    }
    const double target = sc.target_r2 / (1.0 - sc.target_r2) * sc.noise_sd * sc.noise_sd;
    beta *= std::sqrt(target / signal);

    // AR(1) rows through the recursion x_j = rho x_{j-1} + sqrt(1 - rho^2) z_j.
    const double innov = std::sqrt(1.0 - sc.rho * sc.rho);
    out.X.resize(sc.n, p);
    for (Index i = 0; i < sc.n; ++i) {
        double prev = normal(data_rng);
        out.X(i, 0) = prev;
        for (Index j = 1; j < p; ++j) {
            prev = sc.rho * prev + innov * normal(data_rng);
            out.X(i, j) = prev;
        }
    }
    Vector noise(sc.n);
    for (Index i = 0; i < sc.n; ++i) noise[i] = sc.noise_sd * normal(data_rng);
    out.y = out.X * beta + noise;

    if (sc.sign_flip > 0.0) {
        std::vector<Index> nz;
        for (Index j = 0; j < p; ++j) {
            if (beta[j] != 0.0) nz.push_back(j);
        }
        const auto m = static_cast<std::size_t>(std::llround(sc.sign_flip * static_cast<double>(nz.size())));
        std::shuffle(nz.begin(), nz.end(), flip_rng);
        out.flipped.assign(nz.begin(), nz.begin() + static_cast<std::ptrdiff_t>(m));
        std::sort(out.flipped.begin(), out.flipped.end());
        // X_j beta_j is unchanged, so y keeps its law.
        for (Index j : out.flipped) {
            beta[j] = -beta[j];
            out.X.col(j) = -out.X.col(j);
        }
    }
    out.beta_star = beta;
    return out;
}

namespace {

int sign_of(double v) { return (v > 0) - (v < 0); }

} // namespace

MetricsRow evaluate(const VectorRef& beta_hat, const VectorRef& beta_star)
{
    if (beta_hat.size() != beta_star.size()) {
        throw Error(ErrorCode::DimensionMismatch, "estimate and truth differ in length");
    }
    MetricsRow m;
    const Index p = beta_star.size();
    if (p == 0) return m;
    m.rmse = std::sqrt((beta_hat - beta_star).squaredNorm() / static_cast<double>(p));
    Index wrong = 0;
    Index tp = 0;
    Index selected = 0;
    Index truth = 0;
    for (Index j = 0; j < p; ++j) {
        if (sign_of(beta_hat[j]) != sign_of(beta_star[j])) ++wrong;
        const bool s = beta_hat[j] != 0.0;
        const bool t = beta_star[j] != 0.0;
        selected += s;
        truth += t;
        tp += s && t;
    }
    m.sign_error = static_cast<double>(wrong) / static_cast<double>(p);
    m.recall = truth ? static_cast<double>(tp) / static_cast<double>(truth) : 1.0;
    m.precision = selected ? static_cast<double>(tp) / static_cast<double>(selected) : 1.0;
    return m;
}

std::string_view to_string(Method m) noexcept
{
    switch (m) {
        case Method::lasso: return "lasso";
        case Method::group: return "group";
        case Method::sgl_cv: return "sgl-cv";
        case Method::sgl_1se: return "sgl-1se";
        case Method::coop: return "coop";
    }
    return "unknown";
}

Method parse_method(std::string_view name)
{
    for (Method m : all_methods()) {
        if (to_string(m) == name) return m;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown method '" + std::string(name) + "'");
}

std::vector<Method> all_methods()
{
    return {Method::lasso, Method::group, Method::sgl_cv, Method::sgl_1se, Method::coop};
}

std::vector<MetricsRow> run_replicate(const WaveScenario& scenario, const std::vector<Method>& methods,
                                      const BenchmarkOptions& options)
{
    const SimulatedData sim = generate(scenario);
    const Dataset data = prepare(sim.X, sim.y);
    PathOptions popt;
    popt.n_lambda = options.n_lambda;
    popt.solver = options.solver;

    InformationOptions info;
    info.sigma2 = scenario.noise_sd * scenario.noise_sd;

    std::vector<MetricsRow> rows;
    std::optional<SelectionReport> sgl_cv;
    std::optional<PathResult> sgl_path;
    for (Method m : methods) {
        Vector estimate;
        if (m == Method::sgl_cv || m == Method::sgl_1se) {
            if (!sgl_path) {
                const PenaltySpec spec(Family::sgl, sim.partition, options.sgl_alpha);
                sgl_path = path(data, spec, popt);
                CvOptions cv;
                cv.folds = options.cv_folds;
                cv.seed = derive_seed(scenario.seed, 4);
                cv.solver = options.solver;
                sgl_cv = cross_validate(sim.X, sim.y, data.loss, spec, sgl_path->lambdas, cv);
            }
            const Index idx = m == Method::sgl_cv ? *sgl_cv->cv_min_index : *sgl_cv->cv_1se_index;
            estimate = sgl_path->fits[idx].beta;
        } else {
            const Family fam = m == Method::lasso ? Family::lasso : m == Method::group ? Family::group : Family::coop;
            const PenaltySpec spec(fam, sim.partition);
            PathResult pr = path(data, spec, popt);
            const SelectionReport rep = information_criteria(data, pr, info);
            estimate = pr.fits[*rep.bic_index].beta;
        }
        MetricsRow row = evaluate(estimate, sim.beta_star);
        row.method = std::string(to_string(m));
        row.scenario = scenario.label();
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<BenchmarkCell> run_benchmark(const std::vector<WaveScenario>& scenarios,
                                         const std::vector<Method>& methods, const BenchmarkOptions& options)
{
    if (options.replicates < 1) throw Error(ErrorCode::InvalidArgument, "need at least one replicate");
    for (const auto& s : scenarios) s.validate();

    const auto S = static_cast<std::int64_t>(scenarios.size());
    const auto R = static_cast<std::int64_t>(options.replicates);
    std::vector<std::vector<MetricsRow>> results(static_cast<std::size_t>(S * R));
    parallel_for(S * R, options.jobs, [&](std::int64_t task) {
        const std::int64_t s = task / R;
        const std::int64_t r = task % R;
        WaveScenario sc = scenarios[static_cast<std::size_t>(s)];
        sc.seed = derive_seed(options.seed, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(r));
        results[static_cast<std::size_t>(task)] = run_replicate(sc, methods, options);
    });

    auto summarize = [](const std::vector<double>& v) {
        MetricSummary out;
        const double n = static_cast<double>(v.size());
        out.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
        double ss = 0.0;
        for (double x : v) ss += (x - out.mean) * (x - out.mean);
        out.se = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
        return out;
    };

    std::vector<BenchmarkCell> cells;
    for (std::int64_t s = 0; s < S; ++s) {
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            std::vector<double> rmse, sign, recall, precision;
            for (std::int64_t r = 0; r < R; ++r) {
                const MetricsRow& row = results[static_cast<std::size_t>(s * R + r)][mi];
                rmse.push_back(row.rmse);
                sign.push_back(row.sign_error);
                recall.push_back(row.recall);
                precision.push_back(row.precision);
            }
            BenchmarkCell c;
            c.scenario = scenarios[static_cast<std::size_t>(s)].label();
            c.method = methods[mi];
            c.replicates = options.replicates;
            c.rmse = summarize(rmse);
            c.sign_error = summarize(sign);
            c.recall = summarize(recall);
            c.precision = summarize(precision);
            cells.push_back(std::move(c));
        }
    }
    return cells;
}

std::string benchmark_csv(const std::vector<BenchmarkCell>& cells)
{
    std::ostringstream out;
    out << "scenario,method,metric,mean,se\n";
    for (const auto& c : cells) {
        auto row = [&](const char* metric, const MetricSummary& m, double scale) {
            out << csv_escape(c.scenario) << ',' << to_string(c.method) << ',' << metric << ','
                << format_number(m.mean * scale) << ',' << format_number(m.se * scale) << '\n';
        };
        row("rmse_x1e3", c.rmse, 1e3);
        row("sign_error_pct", c.sign_error, 100.0);
        row("recall", c.recall, 1.0);
        row("precision", c.precision, 1.0);
    }
    return out.str();
}

} // namespace coopreg
