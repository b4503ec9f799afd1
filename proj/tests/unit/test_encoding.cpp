#include <doctest.h>

#include "test_support.hpp"

#include <coopreg/encoding.hpp>
#include <coopreg/error.hpp>
#include <coopreg/io.hpp>

using namespace coopreg;
using namespace coopreg::testing;

TEST_CASE("four-level codings")
{
    const char* table[4][3] = {
        {"-0.75", "-0.5", "-0.25"},
        {"0.25", "-0.5", "-0.25"},
        {"0.25", "0.5", "-0.25"},
        {"0.25", "0.5", "0.75"},
    };
    const Matrix m = backward_difference_codings(4);
    for (Index i = 0; i < 4; ++i) {
        for (Index c = 0; c < 3; ++c) CHECK(format_number(m(i, c)) == table[i][c]);
    }
    const auto r = backward_difference_rational(4);
    CHECK(r[0][0] == Rational{-3, 4});
    CHECK(r[0][1] == Rational{-1, 2});
    CHECK(r[3][2] == Rational{3, 4});
    CHECK(r[1][0] == Rational{1, 4});
}

TEST_CASE("two-level codings")
{
    const Matrix m = backward_difference_codings(2);
    CHECK(m(0, 0) == -0.5);
    CHECK(m(1, 0) == 0.5);
    CHECK_THROWS_AS(backward_difference_codings(1), Error);
}

TEST_CASE("codings are contrasts whose coefficients are adjacent increments")
{
    for (Index L = 2; L <= 12; ++L) {
        const Matrix m = backward_difference_codings(L);
        CHECK(m.colwise().sum().cwiseAbs().maxCoeff() < 1e-14);
        const Matrix c = adjacent_contrasts(L);
        CHECK((c.transpose() * m - Matrix::Identity(L - 1, L - 1)).cwiseAbs().maxCoeff() < 1e-14);
        // Row differences of the codings are unit vectors: level l+1 minus level l picks increment l.
        for (Index l = 0; l + 1 < L; ++l) {
            const Vector d = (m.row(l + 1) - m.row(l)).transpose();
            CHECK((d - Vector::Unit(L - 1, l)).cwiseAbs().maxCoeff() < 1e-14);
        }
    }
}

TEST_CASE("encoding observations")
{
    const OrdinalSpec spec{"grade", {"low", "mid", "high"}};
    const EncodedColumn e = encode({"mid", "low", "high", "mid"}, spec);
    CHECK(e.columns.rows() == 4);
    CHECK(e.columns.cols() == 2);
    CHECK(e.columns.row(0) == backward_difference_codings(3).row(1));
    CHECK(e.columns.row(1) == backward_difference_codings(3).row(0));
    CHECK(e.group == std::vector<Index>{0, 1});
    CHECK(e.names[0] == "grade[mid-low]");
    try {
        encode({"low", "top"}, spec);
        FAIL("expected UnknownLevel");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::UnknownLevel);
    }

    const EncodedColumn one = encode({"mid", "mid", "mid"}, spec);
    const Matrix centered = one.columns.rowwise() - one.columns.colwise().mean();
    CHECK(centered.isZero(0.0));

    CHECK_THROWS_AS((OrdinalSpec{"x", {"a"}}.validate()), Error);
    CHECK_THROWS_AS((OrdinalSpec{"x", {"a", "a"}}.validate()), Error);
}

TEST_CASE("level effects and monotonicity")
{
    Vector inc(3);
    inc << 0.5, -1.0, 2.0;
    const Vector eff = level_effects(inc);
    CHECK(eff[0] == 0.0);
    CHECK(eff[1] == 0.5);
    CHECK(eff[2] == -0.5);
    CHECK(eff[3] == 1.5);

    // Fitted values on the codings equal the level effects up to a common shift.
    const Matrix m = backward_difference_codings(4);
    const Vector fitted = m * inc;
    for (Index l = 0; l < 4; ++l) CHECK(fitted[l] - fitted[0] == doctest::Approx(eff[l]));

    Rng rng(1);
    for (int t = 0; t < 1000; ++t) {
        const Index k = uniform_index(rng, 1, 8);
        Vector v = sparse_vector(k, rng, 0.3);
        if (t % 2) v = v.cwiseAbs();
        const Vector e = level_effects(v);
        bool up = true;
        bool down = true;
        for (Index l = 0; l < k; ++l) {
            up &= e[l + 1] >= e[l];
            down &= e[l + 1] <= e[l];
        }
        CHECK(is_monotone(v) == (up || down));
    }
}

TEST_CASE("ordinal schema")
{
    const auto s = parse_ordinal_schema(R"([{"column": "stage", "levels": ["I", "II", "III"]},
                                            {"column": "dose", "levels": [1, 2]}])");
    REQUIRE(s.size() == 2);
    CHECK(s[0].name == "stage");
    CHECK(s[0].levels.size() == 3);
    CHECK(s[1].levels[1] == "2");
    CHECK(parse_ordinal_schema(R"({"ordinals": [{"column": "a", "levels": ["x", "y"]}]})").size() == 1);
    CHECK_THROWS_AS(parse_ordinal_schema(R"([{"column": "a"}])"), Error);
    CHECK_THROWS_AS(parse_ordinal_schema(R"([{"column": "a", "levels": ["x"]}])"), Error);
    CHECK_THROWS_AS(parse_ordinal_schema("not json"), Error);
}
