#pragma once

#include <coopreg/types.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace coopreg {

/// Ordered categorical covariate.
struct OrdinalSpec
{
    std::string name;
    std::vector<std::string> levels;

    /// Throws unless there are at least two distinct levels.
    void validate() const;
};

struct Rational
{
    std::int64_t num = 0;
    std::int64_t den = 1;

    double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Rational&) const = default;
};

/**
 * Backward difference codings for L ordered levels: an L x (L-1) matrix
 * whose column c is -(L-1-c)/L on levels 0..c and (c+1)/L above, so the
 * coefficient of column c is the increment between levels c and c+1.
 */
std::vector<std::vector<Rational>> backward_difference_rational(Index levels);
Matrix backward_difference_codings(Index levels);

/// Adjacent-level contrasts: column c is -1 at level c and +1 at level c+1.
Matrix adjacent_contrasts(Index levels);

struct EncodedColumn
{
    Matrix columns;
    /// Local coefficient indices forming the one group of this covariate.
    std::vector<Index> group;
    std::vector<std::string> names;
};

EncodedColumn encode(const std::vector<std::string>& values, const OrdinalSpec& spec);

/// Level effects relative to the first level: cumulative sums of the increments.
Vector level_effects(const VectorRef& increments);

/// True when the level effects are monotone, i.e. the increments are sign-coherent.
bool is_monotone(const VectorRef& increments);

/// Parses `[{"column": ..., "levels": [...]}, ...]`.
std::vector<OrdinalSpec> parse_ordinal_schema(const std::string& json_text);

} // namespace coopreg
