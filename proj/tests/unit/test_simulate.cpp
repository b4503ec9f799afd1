#include <doctest.h>

#include "test_support.hpp"

#include <coopreg/error.hpp>
#include <coopreg/simulate.hpp>

#include <cmath>
#include <set>
#include <sstream>

using namespace coopreg;
using namespace coopreg::testing;

TEST_CASE("wave pattern")
{
    const Vector w5 = wave_pattern(5);
    const double expect[] = {1, 4, 9, 16, 25, 16, 9, 4, 1};
    for (Index j = 0; j < 9; ++j) CHECK(w5[j] == doctest::Approx(expect[j] / 25.0));
    const Vector w3 = wave_pattern(3);
    for (Index j : {0, 1, 7, 8}) CHECK(w3[j] == 0.0);
    CHECK((w3.array() != 0.0).count() == 5);
    CHECK((wave_pattern(4).array() != 0.0).count() == 7);
    CHECK(wave_width_for_support(5) == 3);
    CHECK(wave_width_for_support(7) == 4);
    CHECK(wave_width_for_support(9) == 5);
    CHECK_THROWS_AS(wave_width_for_support(6), Error);
}

TEST_CASE("generated scenario layout")
{
    WaveScenario sc;
    sc.h = 3;
    sc.seed = 4;
    const SimulatedData s = generate(sc);
    CHECK(s.X.rows() == 180);
    CHECK(s.X.cols() == 90);
    CHECK(s.active_groups.size() == 3);
    CHECK((s.beta_star.array() != 0.0).count() == 15);
    for (Index k = 0; k < 10; ++k) {
        const bool active = std::find(s.active_groups.begin(), s.active_groups.end(), k) != s.active_groups.end();
        CHECK(s.partition.gather(s.beta_star, k).isZero(0.0) == !active);
    }
    // Population R^2 = b' Psi b / (b' Psi b + sigma^2).
    const Matrix psi = ar1_covariance(90, 0.4);
    const double signal = s.beta_star.dot(psi * s.beta_star);
    CHECK(signal / (signal + 1.0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(psi(0, 2) == doctest::Approx(0.16));
    CHECK(sc.label() == "n=180;support=5;rho=0.4;active=3;flip=0");
}

TEST_CASE("generation is bit-reproducible")
{
    WaveScenario sc;
    sc.seed = 9;
    sc.sign_flip = 0.3;
    const SimulatedData a = generate(sc);
    const SimulatedData b = generate(sc);
    CHECK(a.X == b.X);
    CHECK(a.y == b.y);
    CHECK(a.beta_star == b.beta_star);
    CHECK(a.flipped == b.flipped);
    sc.seed = 10;
    CHECK(generate(sc).y != a.y);
}

TEST_CASE("long samples hit the target R2")
{
    for (double rho : {0.0, 0.4, 0.8}) {
        WaveScenario sc;
        sc.n = 100000;
        sc.rho = rho;
        sc.h = 4;
        sc.seed = 3;
        const SimulatedData s = generate(sc);
        const Vector signal = s.X * s.beta_star;
        const Vector noise = s.y - signal;
        const double vs = (signal.array() - signal.mean()).square().mean();
        const double vy = (s.y.array() - s.y.mean()).square().mean();
        CHECK(std::abs(1.0 - (noise.array() - noise.mean()).square().mean() / vy - 0.75) < 0.02);
        CHECK(std::abs(vs / vy - 0.75) < 0.02);
    }
}

TEST_CASE("independent predictors have identity covariance")
{
    WaveScenario sc;
    sc.rho = 0.0;
    sc.n = 20000;
    sc.num_groups = 2;
    sc.active_groups = 1;
    const SimulatedData s = generate(sc);
    const Matrix S = s.X.transpose() * s.X / static_cast<double>(sc.n);
    CHECK((S - Matrix::Identity(18, 18)).cwiseAbs().maxCoeff() < 4.0 / std::sqrt(20000.0));
}

TEST_CASE("sign flips keep the response and flip the chosen coefficients")
{
    WaveScenario sc;
    sc.seed = 5;
    const SimulatedData a = generate(sc);
    sc.sign_flip = 0.5;
    const SimulatedData b = generate(sc);
    CHECK(a.y == b.y);
    CHECK(b.flipped.size() == 14); // round(0.5 * 27)
    std::set<Index> flipped(b.flipped.begin(), b.flipped.end());
    for (Index j = 0; j < 90; ++j) {
        const double s = flipped.count(j) ? -1.0 : 1.0;
        CHECK(b.beta_star[j] == s * a.beta_star[j]);
        CHECK(b.X.col(j) == s * a.X.col(j));
    }
}

TEST_CASE("non-coop methods are unaffected by sign flips")
{
    WaveScenario sc;
    sc.seed = 6;
    sc.n = 60;
    BenchmarkOptions opt;
    opt.n_lambda = 30;
    const std::vector<Method> methods{Method::lasso, Method::group, Method::sgl_cv};
    const auto base = run_replicate(sc, methods, opt);
    sc.sign_flip = 0.4;
    const auto flipped = run_replicate(sc, methods, opt);
    for (std::size_t i = 0; i < methods.size(); ++i) {
        CAPTURE(base[i].method);
        CHECK(flipped[i].rmse == doctest::Approx(base[i].rmse).epsilon(1e-6));
        CHECK(flipped[i].sign_error == doctest::Approx(base[i].sign_error));
    }
}

TEST_CASE("evaluate examples")
{
    WaveScenario sc;
    sc.h = 4;
    const Vector b = generate(sc).beta_star;
    REQUIRE((b.array() != 0.0).count() == 21);
    const MetricsRow same = evaluate(b, b);
    CHECK(same.rmse == 0.0);
    CHECK(same.sign_error == 0.0);
    CHECK(same.recall == 1.0);
    CHECK(same.precision == 1.0);
    CHECK(evaluate(Vector::Zero(90), b).sign_error == doctest::Approx(21.0 / 90.0));
    CHECK(evaluate(Vector::Zero(90), b).rmse == doctest::Approx(b.norm() / std::sqrt(90.0)));

    const Vector full = Vector::LinSpaced(5, 1, 5);
    CHECK(evaluate(-full, full).sign_error == 1.0);
    CHECK_THROWS_AS(evaluate(full, Vector::Zero(4)), Error);
}

TEST_CASE("scenario validation")
{
    WaveScenario sc;
    sc.rho = 1.0;
    CHECK_THROWS_AS(sc.validate(), Error);
    sc = WaveScenario{};
    sc.active_groups = 11;
    CHECK_THROWS_AS(sc.validate(), Error);
    sc = WaveScenario{};
    sc.sign_flip = 1.5;
    CHECK_THROWS_AS(sc.validate(), Error);
    CHECK(parse_method("sgl-1se") == Method::sgl_1se);
    CHECK_THROWS_AS(parse_method("ridge"), Error);
}

TEST_CASE("benchmark output is deterministic and independent of jobs")
{
    WaveScenario sc;
    sc.n = 45;
    sc.h = 3;
    BenchmarkOptions opt;
    opt.replicates = 3;
    opt.n_lambda = 20;
    opt.seed = 8;
    const auto methods = all_methods();
    const std::string a = benchmark_csv(run_benchmark({sc}, methods, opt));
    opt.jobs = 3;
    const std::string b = benchmark_csv(run_benchmark({sc}, methods, opt));
    CHECK(a == b);

    std::istringstream in(a);
    std::string line;
    std::getline(in, line);
    CHECK(line == "scenario,method,metric,mean,se");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 5 * 4);

    // The one-SE rule never keeps more coefficients than CV-min on average here.
    const auto cells = run_benchmark({sc}, {Method::sgl_cv, Method::sgl_1se}, opt);
    CHECK(cells[1].recall.mean <= cells[0].recall.mean + 1e-12);
}
