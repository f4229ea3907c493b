#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "fairkm/matrix.hpp"
#include "fairkm/random.hpp"
#include "fairkm/types.hpp"

namespace fairkm {

struct LloydResult {
    ClusterAssignment assignment;
    Matrix centroids;
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;  // raw objective after each iteration
};

/// Sum of squared centroid distances over all objects (optionally divided by n).
inline double kmeans_objective(const Matrix& data, const ClusterAssignment& assignment,
                               const Matrix& centroids, bool normalized = false) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        total += squared_distance(data.row(i), centroids.row(assignment.cluster_of[i]));
    }
    return normalized ? total / static_cast<double>(data.rows()) : total;
}

/// k centroids sampled uniformly without replacement from the distinct rows
/// of `data`; deterministic for a given seed.
inline Matrix init_centroids(const Matrix& data, int k, std::uint64_t seed) {
    check_features(data);
    if (k < 1) throw InitError("cluster count must be positive");

    // Deduplicate rows; ties broken by original index so each distinct value
    // is represented by its first occurrence on every platform.
    std::vector<std::size_t> order(data.rows());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto ra = data.row(a);
        const auto rb = data.row(b);
        const auto cmp = std::lexicographical_compare_three_way(ra.begin(), ra.end(),
                                                                rb.begin(), rb.end());
        if (cmp != 0) return cmp < 0;
        return a < b;
    });
    std::vector<std::size_t> distinct;
    distinct.reserve(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i > 0 && std::equal(data.row(order[i - 1]).begin(), data.row(order[i - 1]).end(),
                                data.row(order[i]).begin())) {
            continue;
        }
        distinct.push_back(order[i]);
    }

    if (static_cast<std::size_t>(k) > distinct.size()) {
        throw InitError("requested " + std::to_string(k) + " centroids but data has only " +
                        std::to_string(distinct.size()) + " distinct rows");
    }

    std::sort(distinct.begin(), distinct.end());
    std::mt19937_64 rng(seed);
    const auto picks = sample_without_replacement(distinct.size(), static_cast<std::size_t>(k), rng);

    Matrix centroids(static_cast<std::size_t>(k), data.cols());
    for (int c = 0; c < k; ++c) {
        const auto src = data.row(distinct[picks[c]]);
        std::copy(src.begin(), src.end(), centroids.row(c).begin());
    }
    return centroids;
}

/// Nearest-centroid assignment under squared Euclidean distance. Ties go to
/// the lowest cluster index. Clusters left empty are reseeded with the object
/// currently farthest from its own centroid (repeated until none is empty).
inline ClusterAssignment assign_nearest(const Matrix& data, const Matrix& centroids) {
    if (centroids.cols() != data.cols()) {
        throw ShapeError("assign_nearest: centroid dimension mismatch");
    }
    if (!all_finite(centroids)) throw ShapeError("assign_nearest: non-finite centroids");
    const int k = static_cast<int>(centroids.rows());
    if (data.rows() < static_cast<std::size_t>(k)) {
        throw InvariantError("assign_nearest: fewer objects than clusters");
    }

    ClusterAssignment result;
    result.cluster_count = k;
    result.cluster_of.resize(data.rows());
    std::vector<std::int64_t> sizes(k, 0);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        int best = 0;
        double best_dist = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            const double d = squared_distance(data.row(i), centroids.row(c));
            if (d < best_dist) {
                best_dist = d;
                best = c;
            }
        }
        result.cluster_of[i] = best;
        ++sizes[best];
    }

    for (int empty = 0; empty < k; ++empty) {
        if (sizes[empty] > 0) continue;
        // Farthest object whose source cluster can spare it.
        std::size_t pick = data.rows();
        double pick_dist = -1.0;
        for (std::size_t i = 0; i < data.rows(); ++i) {
            if (sizes[result.cluster_of[i]] <= 1) continue;
            const double d = squared_distance(data.row(i), centroids.row(result.cluster_of[i]));
            if (d > pick_dist) {
                pick_dist = d;
                pick = i;
            }
        }
        if (pick == data.rows()) {
            throw InvariantError("assign_nearest: cannot repair empty cluster");
        }
        --sizes[result.cluster_of[pick]];
        result.cluster_of[pick] = empty;
        ++sizes[empty];
        // Donors keep at least one member, so no new cluster can empty here.
    }
    return result;
}

/// Centroid of each cluster as the arithmetic mean of its members.
inline Matrix recompute_means(const Matrix& data, const ClusterAssignment& assignment) {
    check_assignment(data, assignment);
    const int k = assignment.cluster_count;
    Matrix means(static_cast<std::size_t>(k), data.cols(), 0.0);
    std::vector<std::int64_t> sizes(k, 0);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const int c = assignment.cluster_of[i];
        ++sizes[c];
        auto mean_row = means.row(c);
        const auto x = data.row(i);
        for (std::size_t j = 0; j < data.cols(); ++j) mean_row[j] += x[j];
    }
    for (int c = 0; c < k; ++c) {
        auto mean_row = means.row(c);
        for (std::size_t j = 0; j < data.cols(); ++j) {
            mean_row[j] /= static_cast<double>(sizes[c]);
        }
    }
    return means;
}

/// Classical Lloyd iteration from seeded row-sampled centroids, run to an
/// assignment fixed point (or the safety cap).
inline LloydResult lloyd(const Matrix& data, int k, std::uint64_t seed,
                         int max_iterations = 300) {
    LloydResult result;
    result.centroids = init_centroids(data, k, seed);

    ClusterAssignment previous;
    for (int iter = 0; iter < max_iterations; ++iter) {
        result.assignment = assign_nearest(data, result.centroids);
        result.centroids = recompute_means(data, result.assignment);
        result.iterations = iter + 1;
        result.objective_trace.push_back(
            kmeans_objective(data, result.assignment, result.centroids));
        if (!previous.cluster_of.empty() && previous.cluster_of == result.assignment.cluster_of) {
            result.converged = true;
            break;
        }
        previous = result.assignment;
    }
    return result;
}

}  // namespace fairkm
