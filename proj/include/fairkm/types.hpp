#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fairkm/errors.hpp"
#include "fairkm/matrix.hpp"

namespace fairkm {

/// Per-object sensitive-group membership over one sensitive attribute.
struct GroupLabels {
    std::vector<int> group_of;       // length n, values in [0, group_count)
    std::vector<std::string> names;  // one display name per group

    int group_count() const { return static_cast<int>(names.size()); }
    std::size_t size() const { return group_of.size(); }
};

/// Object-to-cluster map for a fixed cluster count.
struct ClusterAssignment {
    std::vector<int> cluster_of;  // length n, values in [0, cluster_count)
    int cluster_count = 0;

    std::size_t size() const { return cluster_of.size(); }
};

enum class StopMode {
    fixed,        // run to the iteration cap
    contrastive,  // stop when utility deterioration overtakes fairness gain
};

/// Knobs of the fairness refinement loop.
struct FairParams {
    int clusters = 5;
    double smoothing = 3.0;     // sharpness of the soft-max approximation
    double learning_rate = 0.01;
    int max_iterations = 200;
    int stop_window = 10;       // lookback of the contrastive rule
    StopMode stop_mode = StopMode::fixed;
};

inline void check_features(const Matrix& data) {
    if (data.rows() < 1 || data.cols() < 1) {
        throw ShapeError("feature matrix must have at least one row and one column");
    }
    if (!all_finite(data)) {
        throw ShapeError("feature matrix contains non-finite values");
    }
}

inline void check_labels(const Matrix& data, const GroupLabels& labels) {
    if (labels.group_of.size() != data.rows()) {
        throw ShapeError("group labels length does not match object count");
    }
    const int g = labels.group_count();
    if (g < 1) throw ShapeError("at least one group is required");
    std::vector<bool> seen(g, false);
    for (int s : labels.group_of) {
        if (s < 0 || s >= g) throw ShapeError("group index out of range");
        seen[s] = true;
    }
    for (int s = 0; s < g; ++s) {
        if (!seen[s]) {
            throw ShapeError("group " + std::to_string(s) + " has no members");
        }
    }
}

inline void check_assignment(const Matrix& data, const ClusterAssignment& assignment) {
    if (assignment.cluster_of.size() != data.rows()) {
        throw ShapeError("assignment length does not match object count");
    }
    const int k = assignment.cluster_count;
    if (k < 1) throw ShapeError("at least one cluster is required");
    std::vector<bool> seen(k, false);
    for (int c : assignment.cluster_of) {
        if (c < 0 || c >= k) throw ShapeError("cluster index out of range");
        seen[c] = true;
    }
    for (int c = 0; c < k; ++c) {
        if (!seen[c]) {
            throw InvariantError("cluster " + std::to_string(c) + " is empty");
        }
    }
}

inline void check_params(const FairParams& params) {
    if (params.clusters < 1) throw ShapeError("cluster count must be positive");
    if (!(params.smoothing > 0.0)) throw ShapeError("smoothing constant must be positive");
    if (!(params.learning_rate > 0.0)) throw ShapeError("learning rate must be positive");
    if (params.max_iterations < 1) throw ShapeError("iteration cap must be at least 1");
    if (params.stop_window < 1) throw ShapeError("stop window must be at least 1");
}

}  // namespace fairkm
