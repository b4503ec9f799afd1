#include <doctest.h>

#include "test_support.hpp"

#include <coopreg/error.hpp>
#include <coopreg/groups.hpp>

#include <cmath>
#include <functional>
#include <sstream>

using namespace coopreg;
using coopreg::testing::Rng;

namespace {

ErrorCode code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::InvalidArgument;
}

Vector vec(std::initializer_list<double> v)
{
    Vector out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

} // namespace

TEST_CASE("validate accepts a disjoint cover")
{
    const auto g = GroupPartition::validate({{0, 1}, {2, 3}}, {std::sqrt(2.0), std::sqrt(2.0)}, 4);
    CHECK(g.num_groups() == 2);
    CHECK(g.dim() == 4);
    CHECK(g.group_of(3) == 1);
    CHECK(g.weight(0) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("validate rejects malformed partitions")
{
    CHECK(code_of([] { GroupPartition::validate({{0, 1}, {1, 2}}, {}, 3); }) == ErrorCode::OverlappingGroups);
    CHECK(code_of([] { GroupPartition::validate({{0}}, {}, 2); }) == ErrorCode::UncoveredIndex);
    CHECK(code_of([] { GroupPartition::validate({{0}, {}}, {}, 1); }) == ErrorCode::EmptyGroup);
    CHECK(code_of([] { GroupPartition::validate({{0}, {1}}, {1.0, 0.0}, 2); }) == ErrorCode::NonPositiveWeight);
    CHECK(code_of([] { GroupPartition::validate({{0}, {1}}, {1.0, -2.0}, 2); }) == ErrorCode::NonPositiveWeight);
    CHECK(code_of([] { GroupPartition::validate({{0}, {5}}, {}, 2); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("default weights are square roots of group sizes")
{
    const auto g = GroupPartition::contiguous({9, 1, 4});
    const auto w = default_weights(g);
    CHECK(w[0] == 3.0);
    CHECK(w[1] == 1.0);
    CHECK(w[2] == 2.0);
    CHECK(GroupPartition::singletons(3).weight(2) == 1.0);
}

TEST_CASE("phi selects the orthant of the reference coordinate")
{
    const Vector v = vec({2, -1, 0});
    CHECK(phi(v, 0) == vec({2, 0, 0}));
    CHECK(phi(v, 1) == vec({0, 1, 0}));
    CHECK(phi(v, 2) == vec({0, 0, 0}));
    CHECK(phi_norm(v, 0) == 2.0);
    CHECK(phi_norm(v, 1) == 1.0);
    CHECK(phi_norm(v, 2) == 0.0);
}

TEST_CASE("phi identities over random vectors")
{
    Rng rng(11);
    for (int t = 0; t < 2000; ++t) {
        const Index m = coopreg::testing::uniform_index(rng, 1, 7);
        const Vector v = coopreg::testing::sparse_vector(m, rng);
        CHECK((positive_part(v) - negative_part(v) - v).cwiseAbs().maxCoeff() == 0.0);
        for (Index j = 0; j < m; ++j) {
            const Vector f = phi(v, j);
            REQUIRE(f.minCoeff() >= 0.0);
            CHECK(f[j] == std::abs(v[j]));
            CHECK(phi(-v, j) == f);
            CHECK(phi_norm(v, j) == doctest::Approx(f.norm()).epsilon(1e-15));
        }
        const SignSplit s = sign_split(v);
        for (Index a : s.positive) CHECK(v[a] > 0);
        for (Index a : s.negative) CHECK(v[a] < 0);
    }
}

TEST_CASE("group file round trip with 1-based indices and weights")
{
    std::istringstream in("# comment\n1, 3\n\n2,4 | 0.5\n5\n");
    const auto g = parse_group_file(in, 5);
    REQUIRE(g.num_groups() == 3);
    CHECK(g.members(0) == std::vector<Index>{0, 2});
    CHECK(g.members(1) == std::vector<Index>{1, 3});
    CHECK(g.weight(0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(g.weight(1) == 0.5);
    CHECK(g.weight(2) == 1.0);

    std::ostringstream out;
    write_group_file(out, g);
    std::istringstream back(out.str());
    const auto h = parse_group_file(back, 5);
    for (Index k = 0; k < 3; ++k) {
        CHECK(h.members(k) == g.members(k));
        // Weights are written with 12 significant digits.
        CHECK(h.weight(k) == doctest::Approx(g.weight(k)).epsilon(1e-11));
    }
}

TEST_CASE("group file errors")
{
    std::istringstream wrong_p("1,2\n3\n");
    CHECK(code_of([&] { parse_group_file(wrong_p, 4); }) == ErrorCode::UncoveredIndex);
    std::istringstream junk("1,x\n");
    CHECK(code_of([&] { parse_group_file(junk, 2); }) == ErrorCode::ParseError);
    std::istringstream zero("0,1\n");
    CHECK_THROWS_AS(parse_group_file(zero, 2), Error);
}

TEST_CASE("gather follows group member order")
{
    const auto g = GroupPartition::validate({{2, 0}, {1}}, {}, 3);
    const Vector v = vec({10, 20, 30});
    CHECK(g.gather(v, 0) == vec({30, 10}));
    CHECK(g.gather(v, 1) == vec({20}));
}
