#include <coopreg/groups.hpp>
#include <coopreg/error.hpp>

#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

namespace coopreg {

GroupPartition GroupPartition::validate(std::vector<std::vector<Index>> groups,
                                        std::vector<double> weights,
                                        Index p)
{
    if (p < 0) {
        throw Error(ErrorCode::InvalidArgument, "negative dimension");
    }
    if (!weights.empty() && weights.size() != groups.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "expected " + std::to_string(groups.size()) + " weights, got " +
                        std::to_string(weights.size()));
    }

    GroupPartition out;
    out.p_ = p;
    out.group_of_.assign(static_cast<std::size_t>(p), -1);
    for (std::size_t k = 0; k < groups.size(); ++k) {
        if (groups[k].empty()) {
            throw Error(ErrorCode::EmptyGroup, "group " + std::to_string(k + 1) + " is empty");
        }
        for (Index j : groups[k]) {
            if (j < 0 || j >= p) {
                throw Error(ErrorCode::InvalidArgument,
                            "index " + std::to_string(j + 1) + " outside 1.." + std::to_string(p));
            }
            if (out.group_of_[j] != -1) {
                throw Error(ErrorCode::OverlappingGroups,
                            "index " + std::to_string(j + 1) + " appears in groups " +
                                std::to_string(out.group_of_[j] + 1) + " and " + std::to_string(k + 1));
            }
            out.group_of_[j] = static_cast<Index>(k);
        }
    }
    for (Index j = 0; j < p; ++j) {
        if (out.group_of_[j] == -1) {
            throw Error(ErrorCode::UncoveredIndex,
                        "index " + std::to_string(j + 1) + " belongs to no group");
        }
    }
    out.groups_ = std::move(groups);

    if (weights.empty()) {
        out.weights_ = default_weights(out);
    } else {
        for (std::size_t k = 0; k < weights.size(); ++k) {
            if (!(weights[k] > 0.0) || !std::isfinite(weights[k])) {
                throw Error(ErrorCode::NonPositiveWeight,
                            "group " + std::to_string(k + 1) + " has weight " + std::to_string(weights[k]));
            }
        }
        out.weights_ = std::move(weights);
    }
    return out;
}

GroupPartition GroupPartition::singletons(Index p)
{
    std::vector<std::vector<Index>> groups(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) groups[j] = {j};
    return validate(std::move(groups), {}, p);
}

GroupPartition GroupPartition::contiguous(const std::vector<Index>& sizes)
{
    std::vector<std::vector<Index>> groups;
    Index next = 0;
    for (Index s : sizes) {
        std::vector<Index> g;
        for (Index i = 0; i < s; ++i) g.push_back(next++);
        groups.push_back(std::move(g));
    }
    return validate(std::move(groups), {}, next);
}

Vector GroupPartition::gather(const VectorRef& v, Index k) const
{
    const auto& idx = groups_[k];
    Vector out(static_cast<Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Index>(i)] = v[idx[i]];
    return out;
}

std::vector<double> default_weights(const GroupPartition& partition)
{
    std::vector<double> w(static_cast<std::size_t>(partition.num_groups()));
    for (Index k = 0; k < partition.num_groups(); ++k) {
        w[k] = std::sqrt(static_cast<double>(partition.group_size(k)));
    }
    return w;
}

SignSplit sign_split(const VectorRef& v)
{
    SignSplit s;
    for (Index i = 0; i < v.size(); ++i) {
        if (v[i] > 0) s.positive.push_back(i);
        else if (v[i] < 0) s.negative.push_back(i);
    }
    return s;
}

Vector positive_part(const VectorRef& v) { return v.cwiseMax(0.0); }

Vector negative_part(const VectorRef& v) { return (-v).cwiseMax(0.0); }

Vector phi(const VectorRef& v, Index j)
{
    if (v[j] > 0) return positive_part(v);
    if (v[j] < 0) return negative_part(v);
    return Vector::Zero(v.size());
}

double phi_norm(const VectorRef& v, Index j)
{
    if (v[j] > 0) return v.cwiseMax(0.0).norm();
    if (v[j] < 0) return v.cwiseMin(0.0).norm();
    return 0.0;
}

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

} // namespace

GroupPartition parse_group_file(std::istream& in, Index p)
{
    std::vector<std::vector<Index>> groups;
    std::vector<std::optional<double>> explicit_weights;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;

        std::optional<double> weight;
        if (const auto bar = line.find('|'); bar != std::string::npos) {
            const std::string wtext = trim(line.substr(bar + 1));
            try {
                std::size_t used = 0;
                weight = std::stod(wtext, &used);
                if (used != wtext.size()) throw std::invalid_argument(wtext);
            } catch (const std::exception&) {
                throw Error(ErrorCode::ParseError,
                            "line " + std::to_string(line_no) + ": bad weight '" + wtext + "'");
            }
            line = trim(line.substr(0, bar));
        }

        std::vector<Index> members;
        std::stringstream ss(line);
        std::string token;
        while (std::getline(ss, token, ',')) {
            token = trim(token);
            if (token.empty()) continue;
            try {
                std::size_t used = 0;
                const long long idx = std::stoll(token, &used);
                if (used != token.size()) throw std::invalid_argument(token);
                if (idx < 1) {
                    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) +
                                                           ": indices are 1-based, got " + token);
                }
                members.push_back(static_cast<Index>(idx - 1));
            } catch (const Error&) {
                throw;
            } catch (const std::exception&) {
                throw Error(ErrorCode::ParseError,
                            "line " + std::to_string(line_no) + ": bad index '" + token + "'");
            }
        }
        groups.push_back(std::move(members));
        explicit_weights.push_back(weight);
    }

    std::vector<double> weights(groups.size());
    for (std::size_t k = 0; k < groups.size(); ++k) {
        weights[k] = explicit_weights[k].value_or(std::sqrt(static_cast<double>(groups[k].size())));
    }
    return GroupPartition::validate(std::move(groups), std::move(weights), p);
}

GroupPartition read_group_file(const std::string& path, Index p)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open group file " + path);
    return parse_group_file(in, p);
}

void write_group_file(std::ostream& out, const GroupPartition& partition)
{
    auto old = out.precision(12);
    for (Index k = 0; k < partition.num_groups(); ++k) {
        const auto& m = partition.members(k);
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (i) out << ',';
            out << m[i] + 1;
        }
        out << " | " << partition.weight(k) << '\n';
    }
    out.precision(old);
}

} // namespace coopreg
