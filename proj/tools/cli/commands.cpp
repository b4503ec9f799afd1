#include "commands.hpp"

#include <coopreg/diagnostics.hpp>
#include <coopreg/encoding.hpp>
#include <coopreg/error.hpp>
#include <coopreg/glm.hpp>
#include <coopreg/groups.hpp>
#include <coopreg/io.hpp>
#include <coopreg/model_select.hpp>
#include <coopreg/ortho_oracle.hpp>
#include <coopreg/parallel.hpp>
#include <coopreg/simulate.hpp>
#include <coopreg/solver.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace coopreg::cli {

namespace {

using nlohmann::json;

json number(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

// "-" writes to the command's stdout.
void emit(const std::string& path, const std::string& contents, std::ostream& out)
{
    if (path == "-") {
        out << contents;
    } else {
        write_text_file(path, contents);
    }
}

struct FitConfig
{
    std::string data;
    std::string response = "y";
    std::string groups;
    std::string ordinal;
    std::string family = "coop";
    double alpha = 0.5;
    std::string loss = "squared";
    std::string scaling = "none";
    Index n_lambda = 100;
    std::optional<double> lambda_min_ratio;
    std::string select = "none";
    std::optional<double> sigma2;
    Index folds = 5;
    std::uint64_t seed = 1;
    int jobs = 1;
    double tol = kDefaultKktTol;
    int max_outer = 2000;
    std::string coef_out = "coefficients.csv";
    std::string summary_out = "summary.json";
};

struct Design
{
    Matrix X;
    Vector y;
    GroupPartition partition;
};

// Predictors in file order; ordinal columns expand into one group of codings.
Design build_design(const FitConfig& cfg)
{
    const CsvTable table = read_csv(cfg.data);
    const Index yc = table.find(cfg.response);
    if (yc < 0) throw Error(ErrorCode::InvalidArgument, "response column '" + cfg.response + "' not found");

    std::map<std::string, OrdinalSpec> ordinal;
    if (!cfg.ordinal.empty()) {
        for (auto& s : parse_ordinal_schema(read_text_file(cfg.ordinal))) {
            if (table.find(s.name) < 0) throw Error(ErrorCode::InvalidArgument, "schema column '" + s.name + "' not found");
            ordinal.emplace(s.name, s);
        }
    }

    const Index n = table.num_rows();
    std::vector<Matrix> blocks;
    std::vector<std::vector<Index>> groups;
    Index p = 0;
    for (Index c = 0; c < static_cast<Index>(table.header.size()); ++c) {
        if (c == yc) continue;
        const std::string& name = table.header[static_cast<std::size_t>(c)];
        if (auto it = ordinal.find(name); it != ordinal.end()) {
            EncodedColumn enc = encode(table.column(c), it->second);
            std::vector<Index> g;
            for (Index j : enc.group) g.push_back(p + j);
            groups.push_back(std::move(g));
            p += enc.columns.cols();
            blocks.push_back(std::move(enc.columns));
        } else {
            groups.push_back({p});
            ++p;
            blocks.push_back(table.numeric_column(c));
        }
    }
    if (p == 0) throw Error(ErrorCode::InvalidArgument, "no predictor columns");

    Design d;
    d.X.resize(n, p);
    Index at = 0;
    for (const Matrix& b : blocks) {
        d.X.middleCols(at, b.cols()) = b;
        at += b.cols();
    }
    d.y = table.numeric_column(yc);

    if (!cfg.groups.empty()) {
        d.partition = read_group_file(cfg.groups, p);
    } else {
        std::vector<double> weights;
        for (const auto& g : groups) weights.push_back(std::sqrt(static_cast<double>(g.size())));
        d.partition = GroupPartition::validate(groups, weights, p);
    }
    return d;
}

Scaling parse_scaling(const std::string& s)
{
    if (s == "none") return Scaling::none;
    if (s == "unit") return Scaling::unit_variance;
    if (s == "within-class") return Scaling::within_class;
    throw Error(ErrorCode::InvalidArgument, "unknown scaling '" + s + "'");
}

int cmd_fit(const FitConfig& cfg, std::ostream& out, std::ostream& err)
{
    const Design design = build_design(cfg);
    const LossSpec loss{parse_loss(cfg.loss), true};
    const Scaling scaling = parse_scaling(cfg.scaling);
    const Dataset data = prepare(design.X, design.y, loss, scaling);
    const PenaltySpec spec(parse_family(cfg.family), design.partition, cfg.alpha);

    const bool wants_ic = cfg.select == "aic" || cfg.select == "bic";
    if (wants_ic) {
        if (loss.kind != LossKind::squared) {
            throw Error(ErrorCode::InvalidArgument, "AIC/BIC need the squared loss; use --select cv");
        }
        if (!cfg.sigma2 && data.n() <= data.p() + 1) {
            throw Error(ErrorCode::InvalidArgument, "--sigma2 is required for AIC/BIC when n <= p + 1");
        }
    }

    SolverOptions solver;
    solver.tol = cfg.tol;
    solver.max_outer = cfg.max_outer;
    PathOptions popt;
    popt.n_lambda = cfg.n_lambda;
    popt.lambda_min_ratio = cfg.lambda_min_ratio;
    popt.solver = solver;
    PathResult result = path(data, spec, popt);

    std::optional<SelectionReport> report;
    std::optional<Index> chosen;
    if (wants_ic) {
        InformationOptions io;
        io.sigma2 = cfg.sigma2;
        report = information_criteria(data, result, io);
        chosen = cfg.select == "aic" ? report->aic_index : report->bic_index;
    } else if (cfg.select == "cv" || cfg.select == "cv1se") {
        CvOptions co;
        co.folds = cfg.folds;
        co.seed = cfg.seed;
        co.jobs = cfg.jobs;
        co.scaling = scaling;
        co.solver = solver;
        report = cross_validate(design.X, design.y, loss, spec, result.lambdas, co);
        chosen = cfg.select == "cv" ? report->cv_min_index : report->cv_1se_index;
    }

    std::ostringstream csv;
    csv << "lambda";
    for (Index j = 0; j < data.p(); ++j) csv << ",coef_" << j + 1;
    csv << '\n';
    json fits = json::array();
    Index unconverged = 0;
    for (std::size_t k = 0; k < result.fits.size(); ++k) {
        const FitResult& f = result.fits[k];
        const RawCoefficients raw = to_raw_scale(data, f.beta, f.intercept);
        csv << format_number(f.lambda);
        for (Index j = 0; j < raw.beta.size(); ++j) csv << ',' << format_number(raw.beta[j]);
        csv << '\n';
        if (!f.converged()) ++unconverged;
        fits.push_back({
            {"lambda", f.lambda},
            {"intercept", raw.intercept},
            {"objective", f.objective},
            {"kkt_residual", f.kkt_residual},
            {"nonzero", (f.beta.array() != 0.0).count()},
            {"df", f.df ? number(*f.df) : json(nullptr)},
            {"converged", f.converged()},
        });
    }

    json summary;
    summary["family"] = std::string(to_string(spec.family));
    summary["loss"] = std::string(to_string(loss.kind));
    summary["n"] = data.n();
    summary["p"] = data.p();
    summary["num_groups"] = spec.partition.num_groups();
    if (spec.family == Family::sgl) summary["alpha"] = cfg.alpha;
    summary["lambda_max"] = result.lambdas.empty() ? 0.0 : result.lambdas.front();
    summary["fits"] = fits;
    json sel;
    sel["rule"] = cfg.select;
    if (report) sel["report"] = json::parse(report->to_json());
    if (chosen) {
        sel["index"] = *chosen + 1;
        sel["lambda"] = result.lambdas[static_cast<std::size_t>(*chosen)];
    } else {
        sel["index"] = nullptr;
        sel["lambda"] = nullptr;
    }
    summary["selection"] = sel;

    emit(cfg.coef_out, csv.str(), out);
    emit(cfg.summary_out, summary.dump(2) + "\n", out);
    if (unconverged > 0) {
        err << "error: " << unconverged << " fit(s) stopped before the KKT check passed; see \"converged\" in the summary\n";
        return kExitNumerical;
    }
    return kExitOk;
}

struct SimulateConfig
{
    std::string preset = "single";
    Index n = 180;
    Index support = 9;
    double rho = 0.4;
    Index active_groups = 3;
    double flip = 0.0;
    Index replicates = 100;
    std::uint64_t seed = 1;
    int jobs = 1;
    Index n_lambda = 100;
    std::string methods = "lasso,group,sgl-cv,sgl-1se,coop";
    std::string out = "-";
};

std::vector<Method> parse_methods(const std::string& list)
{
    std::vector<Method> methods;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) methods.push_back(parse_method(item));
    }
    if (methods.empty()) throw Error(ErrorCode::InvalidArgument, "no methods given");
    return methods;
}

int cmd_simulate(const SimulateConfig& cfg, std::ostream& out)
{
    WaveScenario base;
    base.n = cfg.n;
    base.h = wave_width_for_support(cfg.support);
    base.rho = cfg.rho;
    base.active_groups = cfg.active_groups;
    base.sign_flip = cfg.flip;

    std::vector<WaveScenario> scenarios;
    if (cfg.preset == "single") {
        scenarios.push_back(base);
    } else if (cfg.preset == "table2") {
        for (Index s : {5, 7, 9}) {
            for (Index n : {45, 180, 450}) {
                WaveScenario w = base;
                w.h = wave_width_for_support(s);
                w.n = n;
                scenarios.push_back(w);
            }
        }
    } else {
        for (double f : {0.1, 0.2, 0.3, 0.4, 0.5}) {
            for (Index s : {5, 7, 9}) {
                WaveScenario w = base;
                w.n = 180;
                w.h = wave_width_for_support(s);
                w.sign_flip = f;
                scenarios.push_back(w);
            }
        }
    }
    for (const auto& s : scenarios) s.validate();

    BenchmarkOptions opt;
    opt.replicates = cfg.replicates;
    opt.seed = cfg.seed;
    opt.jobs = cfg.jobs;
    opt.n_lambda = cfg.n_lambda;
    const auto cells = run_benchmark(scenarios, parse_methods(cfg.methods), opt);
    emit(cfg.out, benchmark_csv(cells), out);
    return kExitOk;
}

struct DiagnoseConfig
{
    std::string truth;
    bool illustration = false;
    Index replicates = 0;
    Index n = 20;
    double sigma = 0.1;
    std::uint64_t seed = 1;
    int jobs = 1;
    std::optional<Index> n_lambda;
    std::optional<double> lambda_min_ratio;
    std::string out = "-";
};

json group_json(const std::vector<GroupIrrep>& rows)
{
    json a = json::array();
    for (std::size_t k = 0; k < rows.size(); ++k) {
        a.push_back({{"group", k + 1},
                     {"status", std::string(to_string(rows[k].status))},
                     {"margin", number(rows[k].margin)},
                     {"sign_slack", number(rows[k].sign_slack)}});
    }
    return a;
}

int cmd_diagnose(const DiagnoseConfig& cfg, std::ostream& out)
{
    if (cfg.illustration == !cfg.truth.empty()) {
        throw Error(ErrorCode::InvalidArgument, "give exactly one of --truth and --illustration");
    }
    const TruthSpec truth = cfg.illustration ? illustration_truth() : parse_truth_json(read_text_file(cfg.truth));
    const IrrepReport rep = check_assumptions(truth);

    json j;
    j["coop_ok"] = rep.coop_ok();
    j["group_lasso_ok"] = rep.group_lasso_ok();
    j["coop"] = group_json(rep.coop);
    j["group_lasso"] = group_json(rep.group_lasso);
    if (cfg.replicates > 0) {
        RecoveryOptions ro = cfg.illustration ? illustration_options() : RecoveryOptions{};
        ro.n = cfg.n;
        ro.sigma = cfg.sigma;
        ro.replicates = cfg.replicates;
        ro.seed = cfg.seed;
        ro.jobs = cfg.jobs;
        if (cfg.n_lambda) ro.n_lambda = *cfg.n_lambda;
        if (cfg.lambda_min_ratio) ro.lambda_min_ratio = *cfg.lambda_min_ratio;
        json rec = json::array();
        for (Family f : {Family::lasso, Family::group, Family::coop}) {
            const RecoveryResult r = empirical_recovery(truth, f, ro);
            rec.push_back({{"family", std::string(to_string(f))},
                           {"replicates", r.replicates},
                           {"recovery_frequency", number(r.recovery_frequency)},
                           {"mean_sign_error", number(r.mean_sign_error)},
                           {"sign_error_se", number(r.sign_error_se)},
                           {"mean_rmse", number(r.mean_rmse)},
                           {"bic_selects_unpenalized", number(r.bic_selects_unpenalized)}});
        }
        j["recovery"] = {{"n", ro.n},
                         {"sigma", ro.sigma},
                         {"seed", ro.seed},
                         {"n_lambda", ro.n_lambda},
                         {"lambda_min_ratio", ro.lambda_min_ratio},
                         {"results", rec}};
    }
    emit(cfg.out, j.dump(2) + "\n", out);
    return kExitOk;
}

struct ShrinkConfig
{
    std::string family = "coop";
    double lambda = 1.0;
    double weight = 1.0;
    double alpha = 0.5;
    double range = 3.0;
    Index steps = 61;
    std::string out = "-";
};

int cmd_shrinkmap(const ShrinkConfig& cfg, std::ostream& out)
{
    if (!(cfg.range > 0) || cfg.steps < 2 || !(cfg.lambda >= 0) || !(cfg.weight > 0)) {
        throw Error(ErrorCode::InvalidArgument, "need range > 0, steps >= 2, lambda >= 0 and weight > 0");
    }
    const auto grid =
        ortho::shrinkage_surface(parse_family(cfg.family), cfg.lambda, cfg.weight, cfg.alpha, cfg.range, cfg.steps);
    std::ostringstream csv;
    csv << "ols_1,ols_2,beta_1,beta_2\n";
    for (const auto& g : grid) {
        csv << format_number(g.ols1) << ',' << format_number(g.ols2) << ',' << format_number(g.beta1) << ','
            << format_number(g.beta2) << '\n';
    }
    emit(cfg.out, csv.str(), out);
    return kExitOk;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Sign-coherent group-sparse regression"};
    app.require_subcommand(1);
    const int env_jobs = default_jobs();

    FitConfig fc;
    fc.jobs = env_jobs;
    auto* fit = app.add_subcommand("fit", "Fit a regularization path and write coefficients and a summary");
    fit->add_option("--data", fc.data, "CSV with a header row")->required();
    fit->add_option("--response", fc.response, "Response column name")->capture_default_str();
    fit->add_option("--groups", fc.groups, "Group file (1-based indices); default one group per covariate");
    fit->add_option("--ordinal", fc.ordinal, "Ordinal schema JSON");
    fit->add_option("--family", fc.family)->check(CLI::IsMember({"lasso", "group", "sgl", "coop"}))->capture_default_str();
    fit->add_option("--alpha", fc.alpha, "Sparse group-Lasso mixing")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    fit->add_option("--loss", fc.loss)->check(CLI::IsMember({"squared", "logistic"}))->capture_default_str();
    fit->add_option("--scaling", fc.scaling)->check(CLI::IsMember({"none", "unit", "within-class"}))->capture_default_str();
    fit->add_option("--n-lambda", fc.n_lambda)->check(CLI::PositiveNumber)->capture_default_str();
    fit->add_option("--lambda-min-ratio", fc.lambda_min_ratio)->check(CLI::Range(0.0, 1.0));
    fit->add_option("--select", fc.select)->check(CLI::IsMember({"none", "aic", "bic", "cv", "cv1se"}))->capture_default_str();
    fit->add_option("--sigma2", fc.sigma2, "Known noise variance for AIC/BIC")->check(CLI::PositiveNumber);
    fit->add_option("--folds", fc.folds)->check(CLI::Range(2, 1000))->capture_default_str();
    fit->add_option("--seed", fc.seed)->capture_default_str();
    fit->add_option("--jobs", fc.jobs)->check(CLI::PositiveNumber);
    fit->add_option("--tol", fc.tol, "KKT tolerance")->check(CLI::PositiveNumber)->capture_default_str();
    fit->add_option("--max-outer", fc.max_outer)->check(CLI::PositiveNumber)->capture_default_str();
    fit->add_option("--coef-out", fc.coef_out, "Coefficient CSV, or - for stdout")->capture_default_str();
    fit->add_option("--summary-out", fc.summary_out, "Summary JSON, or - for stdout")->capture_default_str();

    SimulateConfig sc;
    sc.jobs = env_jobs;
    auto* sim = app.add_subcommand("simulate", "Run the wave-scenario benchmark");
    sim->add_option("--preset", sc.preset, "single, table2 (support x n grid) or table3 (sign flips at n = 180)")
        ->check(CLI::IsMember({"single", "table2", "table3"}))
        ->capture_default_str();
    sim->add_option("--n", sc.n)->check(CLI::PositiveNumber)->capture_default_str();
    sim->add_option("--support", sc.support, "Nonzeros per active group (5, 7 or 9)")
        ->check(CLI::IsMember({5, 7, 9}))
        ->capture_default_str();
    sim->add_option("--rho", sc.rho)->capture_default_str();
    sim->add_option("--active-groups", sc.active_groups)->capture_default_str();
    sim->add_option("--flip", sc.flip, "Proportion of flipped signs")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    sim->add_option("--replicates", sc.replicates)->check(CLI::PositiveNumber)->capture_default_str();
    sim->add_option("--seed", sc.seed)->capture_default_str();
    sim->add_option("--jobs", sc.jobs)->check(CLI::PositiveNumber);
    sim->add_option("--n-lambda", sc.n_lambda)->check(CLI::PositiveNumber)->capture_default_str();
    sim->add_option("--methods", sc.methods, "Comma-separated subset of lasso,group,sgl-cv,sgl-1se,coop")
        ->capture_default_str();
    sim->add_option("--out", sc.out)->capture_default_str();

    DiagnoseConfig dc;
    dc.jobs = env_jobs;
    auto* diag = app.add_subcommand("diagnose", "Check the irrepresentable conditions of a truth specification");
    diag->add_option("--truth", dc.truth, "TruthSpec JSON");
    diag->add_flag("--illustration", dc.illustration, "Use the built-in eight-predictor example");
    diag->add_option("--replicates", dc.replicates, "Recovery replicates (0 skips the simulation)")->capture_default_str();
    diag->add_option("--n", dc.n)->check(CLI::PositiveNumber)->capture_default_str();
    diag->add_option("--sigma", dc.sigma)->check(CLI::NonNegativeNumber)->capture_default_str();
    diag->add_option("--seed", dc.seed)->capture_default_str();
    diag->add_option("--jobs", dc.jobs)->check(CLI::PositiveNumber);
    diag->add_option("--n-lambda", dc.n_lambda, "Path length (default 50)")->check(CLI::PositiveNumber);
    diag->add_option("--lambda-min-ratio", dc.lambda_min_ratio,
                     "Smallest lambda over lambda_max (default 3e-3 with --illustration, else 1e-3)")
        ->check(CLI::Range(0.0, 1.0));
    diag->add_option("--out", dc.out)->capture_default_str();

    ShrinkConfig kc;
    auto* shrink = app.add_subcommand("shrinkmap", "Closed-form shrinkage of a two-element group over the OLS plane");
    shrink->add_option("--family", kc.family)->check(CLI::IsMember({"lasso", "group", "sgl", "coop"}))->capture_default_str();
    shrink->add_option("--lambda", kc.lambda)->capture_default_str();
    shrink->add_option("--weight", kc.weight)->capture_default_str();
    shrink->add_option("--alpha", kc.alpha)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    shrink->add_option("--range", kc.range)->capture_default_str();
    shrink->add_option("--steps", kc.steps)->capture_default_str();
    shrink->add_option("--out", kc.out)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }

    try {
        if (fit->parsed()) return cmd_fit(fc, out, err);
        if (sim->parsed()) return cmd_simulate(sc, out);
        if (diag->parsed()) return cmd_diagnose(dc, out);
        return cmd_shrinkmap(kc, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return is_numerical(e.code()) ? kExitNumerical : kExitInput;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    std::vector<const char*> argv{"coopreg"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace coopreg::cli
