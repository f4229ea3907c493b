#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "fairkm/matrix.hpp"
#include "fairkm/types.hpp"

namespace fairkm {

/// Per-(cluster, group) member counts, feature sums and squared-norm sums.
///
/// Together with a centroid these reconstruct a group's mean squared centroid
/// distance through sum ||x - mu||^2 = sum ||x||^2 - 2 mu . sum x + n ||mu||^2,
/// which is what makes single-object reassignments O(d) instead of O(n d).
class SuffStats {
public:
    SuffStats() = default;

    static SuffStats build(const Matrix& data, const GroupLabels& labels,
                           const ClusterAssignment& assignment) {
        check_labels(data, labels);
        check_assignment(data, assignment);

        SuffStats stats;
        stats.clusters_ = assignment.cluster_count;
        stats.groups_ = labels.group_count();
        stats.dim_ = data.cols();
        stats.counts_.assign(static_cast<std::size_t>(stats.clusters_) * stats.groups_, 0);
        stats.feature_sums_.assign(stats.counts_.size() * stats.dim_, 0.0);
        stats.sqnorm_sums_.assign(stats.counts_.size(), 0.0);
        stats.cluster_sizes_.assign(stats.clusters_, 0);

        for (std::size_t i = 0; i < data.rows(); ++i) {
            stats.add(i, assignment.cluster_of[i], data, labels);
        }
        return stats;
    }

    /// Transfer one object between clusters in O(d).
    /// Throws RejectedMoveError when the move would empty the source cluster.
    void move(std::size_t object, int from, int to, const Matrix& data,
              const GroupLabels& labels) {
        if (from == to) throw RejectedMoveError("move: source equals target cluster");
        if (from < 0 || from >= clusters_ || to < 0 || to >= clusters_) {
            throw ShapeError("move: cluster index out of range");
        }
        if (object >= data.rows()) throw ShapeError("move: object index out of range");
        const int s = labels.group_of[object];
        if (counts_[cell(from, s)] < 1) {
            throw ShapeError("move: object's group has no members in the source cluster");
        }
        if (cluster_sizes_[from] <= 1) {
            throw RejectedMoveError("move would empty cluster " + std::to_string(from));
        }
        remove(object, from, data, labels);
        add(object, to, data, labels);
    }

    std::int64_t count(int cluster, int group) const { return counts_[cell(cluster, group)]; }

    std::span<const double> feature_sum(int cluster, int group) const {
        return {feature_sums_.data() + cell(cluster, group) * dim_, dim_};
    }

    double sqnorm_sum(int cluster, int group) const { return sqnorm_sums_[cell(cluster, group)]; }

    std::int64_t cluster_size(int cluster) const { return cluster_sizes_[cluster]; }

    int clusters() const { return clusters_; }
    int groups() const { return groups_; }
    std::size_t dim() const { return dim_; }

private:
    std::size_t cell(int cluster, int group) const {
        return static_cast<std::size_t>(cluster) * groups_ + group;
    }

    void add(std::size_t object, int cluster, const Matrix& data, const GroupLabels& labels) {
        const std::size_t idx = cell(cluster, labels.group_of[object]);
        const auto x = data.row(object);
        ++counts_[idx];
        ++cluster_sizes_[cluster];
        double* sums = feature_sums_.data() + idx * dim_;
        for (std::size_t j = 0; j < dim_; ++j) sums[j] += x[j];
        sqnorm_sums_[idx] += squared_norm(x);
    }

    void remove(std::size_t object, int cluster, const Matrix& data, const GroupLabels& labels) {
        const std::size_t idx = cell(cluster, labels.group_of[object]);
        const auto x = data.row(object);
        --counts_[idx];
        --cluster_sizes_[cluster];
        double* sums = feature_sums_.data() + idx * dim_;
        for (std::size_t j = 0; j < dim_; ++j) sums[j] -= x[j];
        sqnorm_sums_[idx] -= squared_norm(x);
    }

    int clusters_ = 0;
    int groups_ = 0;
    std::size_t dim_ = 0;
    std::vector<std::int64_t> counts_;        // clusters x groups
    std::vector<double> feature_sums_;        // clusters x groups x dim
    std::vector<double> sqnorm_sums_;         // clusters x groups
    std::vector<std::int64_t> cluster_sizes_; // clusters
};

/// Mean squared centroid distance of one group inside one cluster,
/// reconstructed from sufficient statistics in O(d). Returns NaN when the
/// group has no members in the cluster (the loss is undefined there).
inline double group_loss(const SuffStats& stats, int cluster, int group,
                         std::span<const double> centroid) {
    const std::int64_t n = stats.count(cluster, group);
    if (n == 0) return std::numeric_limits<double>::quiet_NaN();
    const double cross = dot(centroid, stats.feature_sum(cluster, group));
    const double mu_sq = squared_norm(centroid);
    return (stats.sqnorm_sum(cluster, group) - 2.0 * cross + static_cast<double>(n) * mu_sq) /
           static_cast<double>(n);
}

}  // namespace fairkm
