#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairkm/matrix.hpp"
#include "fairkm/types.hpp"

namespace fairkm {

/// Percentage gap between the worst-off and best-off groups of one cluster.
/// `degenerate` marks a gap over a near-zero best-off loss, reported as the
/// cap instead of a meaningless huge ratio.
struct Disparity {
    double value = 0.0;
    bool degenerate = false;
};

inline constexpr double kDisparityCap = 1e6;
inline constexpr double kDisparityLossFloor = 1e-12;

/// Disparity of one cluster from its per-group losses (NaN = group absent).
/// Zero when at most one group is present or all present losses are equal.
inline Disparity disparity_from_losses(std::span<const double> losses) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    int present = 0;
    for (double loss : losses) {
        if (std::isnan(loss)) continue;
        ++present;
        lo = std::min(lo, loss);
        hi = std::max(hi, loss);
    }
    if (present <= 1 || hi == lo) return {0.0, false};
    if (lo < kDisparityLossFloor) return {kDisparityCap, true};
    return {100.0 * (hi - lo) / lo, false};
}

/// Per-(cluster, group) mean squared centroid distances by direct summation;
/// NaN where a group has no members in a cluster.
inline Matrix group_loss_matrix(const Matrix& data, const GroupLabels& labels,
                                const ClusterAssignment& assignment, const Matrix& centroids) {
    const int k = assignment.cluster_count;
    const int g = labels.group_count();
    Matrix sums(static_cast<std::size_t>(k), static_cast<std::size_t>(g), 0.0);
    std::vector<std::int64_t> counts(static_cast<std::size_t>(k) * g, 0);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const int c = assignment.cluster_of[i];
        const int s = labels.group_of[i];
        sums(c, s) += squared_distance(data.row(i), centroids.row(c));
        ++counts[static_cast<std::size_t>(c) * g + s];
    }
    Matrix losses(static_cast<std::size_t>(k), static_cast<std::size_t>(g));
    for (int c = 0; c < k; ++c) {
        for (int s = 0; s < g; ++s) {
            const auto n = counts[static_cast<std::size_t>(c) * g + s];
            losses(c, s) = n == 0 ? std::numeric_limits<double>::quiet_NaN()
                                  : sums(c, s) / static_cast<double>(n);
        }
    }
    return losses;
}

inline Disparity cluster_disparity(const Matrix& data, const GroupLabels& labels,
                                   const ClusterAssignment& assignment, const Matrix& centroids,
                                   int cluster) {
    const Matrix losses = group_loss_matrix(data, labels, assignment, centroids);
    return disparity_from_losses(losses.row(cluster));
}

/// Mean disparity over all clusters; carries the degeneracy marker when any
/// cluster was capped.
inline Disparity average_cluster_disparity_from_losses(const Matrix& losses) {
    Disparity out;
    for (std::size_t c = 0; c < losses.rows(); ++c) {
        const Disparity cd = disparity_from_losses(losses.row(c));
        out.value += cd.value;
        out.degenerate = out.degenerate || cd.degenerate;
    }
    out.value /= static_cast<double>(losses.rows());
    return out;
}

inline Disparity average_cluster_disparity(const Matrix& data, const GroupLabels& labels,
                                           const ClusterAssignment& assignment,
                                           const Matrix& centroids) {
    return average_cluster_disparity_from_losses(
        group_loss_matrix(data, labels, assignment, centroids));
}

/// Worst-off group's mean squared centroid distance taken over the whole
/// assignment (the assignment-level fairness objective used for comparison).
inline double fair_kmeans_objective(const Matrix& data, const GroupLabels& labels,
                                    const ClusterAssignment& assignment,
                                    const Matrix& centroids) {
    const int g = labels.group_count();
    std::vector<double> sums(g, 0.0);
    std::vector<std::int64_t> counts(g, 0);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const int s = labels.group_of[i];
        sums[s] += squared_distance(data.row(i), centroids.row(assignment.cluster_of[i]));
        ++counts[s];
    }
    double worst = 0.0;
    for (int s = 0; s < g; ++s) {
        if (counts[s] == 0) {
            throw MetricError("group " + labels.names[s] + " has no members in the dataset");
        }
        worst = std::max(worst, sums[s] / static_cast<double>(counts[s]));
    }
    return worst;
}

/// Snapshot of every reported metric for one clustering.
struct MetricReport {
    double acd = 0.0;
    bool acd_degenerate = false;
    double kmeans_objective = 0.0;        // squared-distance sum / n
    double worst_group_objective = 0.0;   // per-cluster worst-group sum / k
    double fair_kmeans_objective = 0.0;   // assignment-level worst group
    std::vector<Disparity> cluster_disparities;
    Matrix group_losses;                  // k x g, NaN where a group is absent
};

inline MetricReport metric_report(const Matrix& data, const GroupLabels& labels,
                                  const ClusterAssignment& assignment, const Matrix& centroids) {
    MetricReport report;
    report.group_losses = group_loss_matrix(data, labels, assignment, centroids);

    const int k = assignment.cluster_count;
    double objective = 0.0;
    for (int c = 0; c < k; ++c) {
        const Disparity cd = disparity_from_losses(report.group_losses.row(c));
        report.cluster_disparities.push_back(cd);
        report.acd += cd.value;
        report.acd_degenerate = report.acd_degenerate || cd.degenerate;
        double worst = -std::numeric_limits<double>::infinity();
        for (int s = 0; s < labels.group_count(); ++s) {
            const double loss = report.group_losses(c, s);
            if (!std::isnan(loss)) worst = std::max(worst, loss);
        }
        objective += worst;
    }
    report.acd /= static_cast<double>(k);
    report.worst_group_objective = objective / static_cast<double>(k);

    double km = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        km += squared_distance(data.row(i), centroids.row(assignment.cluster_of[i]));
    }
    report.kmeans_objective = km / static_cast<double>(data.rows());
    report.fair_kmeans_objective = fair_kmeans_objective(data, labels, assignment, centroids);
    return report;
}

inline nlohmann::ordered_json to_json(const MetricReport& report) {
    nlohmann::ordered_json j;
    j["acd"] = report.acd;
    j["acd_degenerate"] = report.acd_degenerate;
    j["kmeans_objective"] = report.kmeans_objective;
    j["worst_group_objective"] = report.worst_group_objective;
    j["fair_kmeans_objective"] = report.fair_kmeans_objective;
    auto disparities = nlohmann::ordered_json::array();
    for (const auto& cd : report.cluster_disparities) {
        disparities.push_back({{"value", cd.value}, {"degenerate", cd.degenerate}});
    }
    j["cluster_disparities"] = std::move(disparities);
    auto losses = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < report.group_losses.rows(); ++c) {
        auto row = nlohmann::ordered_json::array();
        for (double v : report.group_losses.row(c)) {
            if (std::isnan(v)) {
                row.push_back(nullptr);
            } else {
                row.push_back(v);
            }
        }
        losses.push_back(std::move(row));
    }
    j["group_losses"] = std::move(losses);
    return j;
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string metric_csv_header() {
    return "acd,kmeans_objective,worst_group_objective,fair_kmeans_objective,degenerate";
}

inline std::string metric_csv_row(const MetricReport& report) {
    return format_double(report.acd) + "," + format_double(report.kmeans_objective) + "," +
           format_double(report.worst_group_objective) + "," +
           format_double(report.fair_kmeans_objective) + "," +
           (report.acd_degenerate ? "1" : "0");
}

}  // namespace fairkm
