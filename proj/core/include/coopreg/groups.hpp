#pragma once

#include <coopreg/types.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace coopreg {

/**
 * Exhaustive, disjoint partition of the coefficient indices {0..p-1} into
 * K ordered groups, each carrying a positive weight.
 *
 * Indices are 0-based inside the library. The group file reader converts
 * from the 1-based convention used on disk.
 */
class GroupPartition
{
public:
    GroupPartition() = default;

    /// Validates and builds a partition. An empty `weights` selects the
    /// default sqrt(p_k) weights.
    static GroupPartition validate(std::vector<std::vector<Index>> groups,
                                   std::vector<double> weights,
                                   Index p);

    /// One group per coefficient, unit weights.
    static GroupPartition singletons(Index p);

    /// Contiguous groups of the given sizes, default weights.
    static GroupPartition contiguous(const std::vector<Index>& sizes);

    Index dim() const noexcept { return p_; }
    Index num_groups() const noexcept { return static_cast<Index>(groups_.size()); }
    const std::vector<Index>& members(Index k) const { return groups_[k]; }
    Index group_size(Index k) const { return static_cast<Index>(groups_[k].size()); }
    double weight(Index k) const { return weights_[k]; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    Index group_of(Index j) const { return group_of_[j]; }

    /// Gathers the entries of `v` belonging to group k.
    Vector gather(const VectorRef& v, Index k) const;

private:
    std::vector<std::vector<Index>> groups_;
    std::vector<double> weights_;
    std::vector<Index> group_of_;
    Index p_ = 0;
};

/// w_k = sqrt(p_k).
std::vector<double> default_weights(const GroupPartition& partition);

/// Indices of the positive and negative entries of a group-length vector.
struct SignSplit
{
    std::vector<Index> positive;
    std::vector<Index> negative;
};

SignSplit sign_split(const VectorRef& v);

/// Componentwise positive part v+ and negative part v- (both nonnegative).
Vector positive_part(const VectorRef& v);
Vector negative_part(const VectorRef& v);

/**
 * phi_j(v): the positive part of v when v_j > 0, the negative part when
 * v_j < 0, and the zero vector when v_j = 0. `j` is local to the group.
 */
Vector phi(const VectorRef& v, Index j);

/// Euclidean norm of phi_j(v) without materializing it.
double phi_norm(const VectorRef& v, Index j);

/**
 * Group file: one line per group, comma-separated 1-based indices with an
 * optional trailing `| weight`. Blank lines and lines starting with '#' are
 * skipped. Groups without an explicit weight get sqrt(p_k).
 */
GroupPartition parse_group_file(std::istream& in, Index p);
GroupPartition read_group_file(const std::string& path, Index p);
void write_group_file(std::ostream& out, const GroupPartition& partition);

} // namespace coopreg
