#include <coopreg/encoding.hpp>
#include <coopreg/error.hpp>

#include <json.hpp>

#include <numeric>
#include <set>
#include <unordered_map>

namespace coopreg {

void OrdinalSpec::validate() const
{
    if (levels.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "ordinal '" + name + "' needs at least two levels");
    }
    std::set<std::string> seen(levels.begin(), levels.end());
    if (seen.size() != levels.size()) {
        throw Error(ErrorCode::InvalidArgument, "ordinal '" + name + "' has repeated levels");
    }
}

std::vector<std::vector<Rational>> backward_difference_rational(Index levels)
{
    if (levels < 2) throw Error(ErrorCode::InvalidArgument, "need at least two levels");
    std::vector<std::vector<Rational>> out(static_cast<std::size_t>(levels),
                                           std::vector<Rational>(static_cast<std::size_t>(levels - 1)));
    for (Index i = 0; i < levels; ++i) {
        for (Index c = 0; c < levels - 1; ++c) {
            std::int64_t num = i <= c ? -(levels - 1 - c) : (c + 1);
            std::int64_t den = levels;
            const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
            out[i][c] = {num / g, den / g};
        }
    }
    return out;
}

Matrix backward_difference_codings(Index levels)
{
    const auto r = backward_difference_rational(levels);
    Matrix m(levels, levels - 1);
    for (Index i = 0; i < levels; ++i) {
        for (Index c = 0; c < levels - 1; ++c) m(i, c) = r[i][c].value();
    }
    return m;
}

Matrix adjacent_contrasts(Index levels)
{
    if (levels < 2) throw Error(ErrorCode::InvalidArgument, "need at least two levels");
    Matrix m = Matrix::Zero(levels, levels - 1);
    for (Index c = 0; c < levels - 1; ++c) {
        m(c, c) = -1.0;
        m(c + 1, c) = 1.0;
    }
    return m;
}

EncodedColumn encode(const std::vector<std::string>& values, const OrdinalSpec& spec)
{
    spec.validate();
    std::unordered_map<std::string, Index> level_of;
    for (std::size_t i = 0; i < spec.levels.size(); ++i) level_of[spec.levels[i]] = static_cast<Index>(i);
    const Index L = static_cast<Index>(spec.levels.size());
    const Matrix codings = backward_difference_codings(L);

    EncodedColumn out;
    out.columns.resize(static_cast<Index>(values.size()), L - 1);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto it = level_of.find(values[i]);
        if (it == level_of.end()) {
            throw Error(ErrorCode::UnknownLevel,
                        "'" + values[i] + "' is not a declared level of '" + spec.name + "'");
        }
        out.columns.row(static_cast<Index>(i)) = codings.row(it->second);
    }
    for (Index c = 0; c < L - 1; ++c) {
        out.group.push_back(c);
        out.names.push_back(spec.name + "[" + spec.levels[c + 1] + "-" + spec.levels[c] + "]");
    }
    return out;
}

Vector level_effects(const VectorRef& increments)
{
    Vector out(increments.size() + 1);
    out[0] = 0.0;
    for (Index i = 0; i < increments.size(); ++i) out[i + 1] = out[i] + increments[i];
    return out;
}

bool is_monotone(const VectorRef& increments)
{
    return (increments.array() >= 0.0).all() || (increments.array() <= 0.0).all();
}

std::vector<OrdinalSpec> parse_ordinal_schema(const std::string& json_text)
{
    std::vector<OrdinalSpec> out;
    try {
        const auto j = nlohmann::json::parse(json_text);
        const auto& arr = j.is_object() && j.contains("ordinals") ? j.at("ordinals") : j;
        if (!arr.is_array()) throw Error(ErrorCode::ParseError, "ordinal schema must be an array");
        for (const auto& item : arr) {
            OrdinalSpec s;
            s.name = item.at("column").get<std::string>();
            for (const auto& lv : item.at("levels")) {
                s.levels.push_back(lv.is_string() ? lv.get<std::string>() : lv.dump());
            }
            s.validate();
            out.push_back(std::move(s));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("ordinal schema: ") + e.what());
    }
    return out;
}

} // namespace coopreg
