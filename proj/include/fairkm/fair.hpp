#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "fairkm/matrix.hpp"
#include "fairkm/metrics.hpp"
#include "fairkm/suffstats.hpp"
#include "fairkm/types.hpp"

namespace fairkm {

/// Metrics recorded after each refinement iteration.
struct IterationRecord {
    double objective = 0.0;           // sum over clusters of the worst group loss
    double smoothed_objective = 0.0;  // its soft-max approximation
    double kmeans_objective = 0.0;    // squared-distance sum / n
    double acd = 0.0;
    bool acd_degenerate = false;
    std::vector<double> group_losses; // clusters x groups, NaN where absent
};

/// (1/phi) * log sum exp(phi * v) over the non-NaN entries of `values`,
/// max-shifted so large losses cannot overflow. NaN when no entry is present.
inline double smooth_max(std::span<const double> values, double phi) {
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : values) {
        if (!std::isnan(v)) hi = std::max(hi, v);
    }
    if (hi == -std::numeric_limits<double>::infinity()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double acc = 0.0;
    for (double v : values) {
        if (!std::isnan(v)) acc += std::exp(phi * (v - hi));
    }
    return hi + std::log(acc) / phi;
}

/// One refinement run: greedy reassignment passes that shrink the per-cluster
/// worst-group loss, alternated with one smoothed-gradient step per centroid.
///
/// The referenced data and labels must outlive the run and stay unchanged;
/// every derived quantity (sufficient statistics, cached losses, history)
/// lives in the run itself.
class FairRun {
public:
    FairRun(const Matrix& data, const GroupLabels& labels, const FairParams& params,
            ClusterAssignment assignment, Matrix centroids)
        : data_(&data),
          labels_(&labels),
          params_(params),
          assignment_(std::move(assignment)),
          centroids_(std::move(centroids)) {
        check_features(data);
        check_labels(data, *labels_);
        check_assignment(data, assignment_);
        check_params(params_);
        if (assignment_.cluster_count != params_.clusters) {
            throw ShapeError("FairRun: assignment cluster count disagrees with params");
        }
        if (centroids_.rows() != static_cast<std::size_t>(assignment_.cluster_count) ||
            centroids_.cols() != data.cols()) {
            throw ShapeError("FairRun: centroid shape mismatch");
        }
        stats_ = SuffStats::build(data, *labels_, assignment_);
        row_sqnorms_.resize(data.rows());
        for (std::size_t i = 0; i < data.rows(); ++i) {
            row_sqnorms_[i] = squared_norm(data.row(i));
        }
        refresh_losses();
    }

    int clusters() const { return assignment_.cluster_count; }
    int groups() const { return labels_->group_count(); }

    const ClusterAssignment& assignment() const { return assignment_; }
    const Matrix& centroids() const { return centroids_; }
    const SuffStats& stats() const { return stats_; }
    const std::vector<IterationRecord>& history() const { return history_; }
    int iteration() const { return static_cast<int>(history_.size()); }

    /// Cached per-(cluster, group) losses; NaN where the group is absent.
    const Matrix& losses() const { return losses_; }

    std::optional<double> loss(int cluster, int group) const {
        const double v = losses_(cluster, group);
        if (std::isnan(v)) return std::nullopt;
        return v;
    }

    /// Group with the largest loss among those present; ties to lowest index.
    int worst_group(int cluster) const {
        int best = -1;
        double best_loss = -std::numeric_limits<double>::infinity();
        for (int s = 0; s < groups(); ++s) {
            const double v = losses_(cluster, s);
            if (!std::isnan(v) && v > best_loss) {
                best_loss = v;
                best = s;
            }
        }
        return best;
    }

    /// Sum over clusters of the worst present group loss.
    double objective(bool normalized = false) const {
        return normalized ? objective_ / static_cast<double>(clusters()) : objective_;
    }

    /// Soft-max form of the objective at the given sharpness.
    double smoothed_objective(double phi) const {
        double total = 0.0;
        for (int c = 0; c < clusters(); ++c) {
            total += smooth_max(losses_.row(c), phi);
        }
        return total;
    }
    double smoothed_objective() const { return smoothed_objective(params_.smoothing); }

    /// Objective change if `object` moved from its cluster to `target`,
    /// centroids held fixed. O(d + g); does not modify the run.
    double move_delta(std::size_t object, int target) const {
        return move_delta(object, assignment_.cluster_of[object], target);
    }

    double move_delta(std::size_t object, int source, int target) const {
        if (object >= data_->rows()) throw ShapeError("move_delta: object index out of range");
        if (source != assignment_.cluster_of[object]) {
            throw ShapeError("move_delta: object is not in the stated source cluster");
        }
        if (target < 0 || target >= clusters() || target == source) {
            throw RejectedMoveError("move_delta: invalid target cluster");
        }
        if (stats_.cluster_size(source) <= 1) {
            throw RejectedMoveError("move_delta: move would empty the source cluster");
        }
        const int s = labels_->group_of[object];
        const double source_loss = loss_without(source, s, object);
        const double target_loss = loss_with(target, s, object);
        const double new_source_worst = worst_with_override(source, s, source_loss);
        const double new_target_worst = worst_with_override(target, s, target_loss);
        return new_source_worst + new_target_worst - cluster_worst_[source] -
               cluster_worst_[target];
    }

    /// One greedy pass: objects in ascending index order, candidate clusters in
    /// ascending index order, committing every strictly improving move at once.
    /// Moves that would empty the source cluster are skipped. Returns the
    /// number of committed moves.
    std::size_t reassign_pass() {
        std::size_t moves = 0;
        const int k = clusters();
        for (std::size_t i = 0; i < data_->rows(); ++i) {
            for (int target = 0; target < k; ++target) {
                const int source = assignment_.cluster_of[i];
                if (target == source) continue;
                if (stats_.cluster_size(source) <= 1) break;
                if (move_delta(i, source, target) < 0.0) {
                    apply_move(i, source, target);
                    ++moves;
                }
            }
        }
        ++reassign_passes_;
        if (reassign_passes_ % kRebuildEvery == 0) rebuild();
        return moves;
    }

    /// Gradient of the smoothed objective with respect to one centroid.
    std::vector<double> centroid_gradient(int cluster, double phi) const {
        const int g = groups();
        double hi = -std::numeric_limits<double>::infinity();
        for (int s = 0; s < g; ++s) {
            const double v = losses_(cluster, s);
            if (!std::isnan(v)) hi = std::max(hi, v);
        }
        // Soft-max weights over present groups; the max shift cancels in the
        // normalized ratio but keeps every exponent representable.
        double weight_sum = 0.0;
        std::vector<double> weights(g, 0.0);
        for (int s = 0; s < g; ++s) {
            const double v = losses_(cluster, s);
            if (std::isnan(v)) continue;
            weights[s] = std::exp(phi * (v - hi));
            weight_sum += weights[s];
        }
        std::vector<double> gradient(data_->cols(), 0.0);
        const auto mu = centroids_.row(cluster);
        for (int s = 0; s < g; ++s) {
            if (weights[s] == 0.0) continue;
            const double w = weights[s] / weight_sum;
            const auto sums = stats_.feature_sum(cluster, s);
            const double n = static_cast<double>(stats_.count(cluster, s));
            for (std::size_t j = 0; j < gradient.size(); ++j) {
                gradient[j] += w * (sums[j] / n - mu[j]);
            }
        }
        for (double& v : gradient) v *= -2.0;
        return gradient;
    }
    std::vector<double> centroid_gradient(int cluster) const {
        return centroid_gradient(cluster, params_.smoothing);
    }

    /// One descent step per centroid, clusters in ascending index order;
    /// assignment unchanged, cached losses refreshed afterwards.
    void gradient_step(double phi, double eta) {
        for (int c = 0; c < clusters(); ++c) {
            const auto gradient = centroid_gradient(c, phi);
            auto mu = centroids_.row(c);
            for (std::size_t j = 0; j < mu.size(); ++j) {
                mu[j] -= eta * gradient[j];
            }
        }
        refresh_losses();
    }
    void gradient_step() { gradient_step(params_.smoothing, params_.learning_rate); }

    /// E-step, M-step, then a history record. Returns false once the stopping
    /// rule fires.
    bool iterate() {
        reassign_pass();
        gradient_step();
        record();
        return !should_stop();
    }

    void run() {
        while (iterate()) {
        }
    }

    bool should_stop() const;

private:
    static constexpr int kRebuildEvery = 50;  // bound floating-point drift

    double stats_loss(int c, int s) const {
        return group_loss(stats_, c, s, centroids_.row(c));
    }

    // Loss of (cluster, group) with `object` removed / added, from the
    // sufficient statistics and the cached centroid norms.
    double loss_without(int cluster, int group, std::size_t object) const {
        const double n = static_cast<double>(stats_.count(cluster, group)) - 1.0;
        if (n < 0.5) return std::numeric_limits<double>::quiet_NaN();
        const auto mu = centroids_.row(cluster);
        const double cross =
            dot(mu, stats_.feature_sum(cluster, group)) - dot(mu, data_->row(object));
        const double sq = stats_.sqnorm_sum(cluster, group) - row_sqnorms_[object];
        return (sq - 2.0 * cross + n * centroid_sqnorms_[cluster]) / n;
    }

    double loss_with(int cluster, int group, std::size_t object) const {
        const double n = static_cast<double>(stats_.count(cluster, group)) + 1.0;
        const auto mu = centroids_.row(cluster);
        const double cross =
            dot(mu, stats_.feature_sum(cluster, group)) + dot(mu, data_->row(object));
        const double sq = stats_.sqnorm_sum(cluster, group) + row_sqnorms_[object];
        return (sq - 2.0 * cross + n * centroid_sqnorms_[cluster]) / n;
    }

    double worst_with_override(int cluster, int group, double override_loss) const {
        double worst = -std::numeric_limits<double>::infinity();
        for (int s = 0; s < groups(); ++s) {
            const double v = s == group ? override_loss : losses_(cluster, s);
            if (!std::isnan(v)) worst = std::max(worst, v);
        }
        return worst;
    }

    void apply_move(std::size_t object, int source, int target) {
        stats_.move(object, source, target, *data_, *labels_);
        assignment_.cluster_of[object] = target;
        const int s = labels_->group_of[object];
        losses_(source, s) = stats_.count(source, s) == 0
                                 ? std::numeric_limits<double>::quiet_NaN()
                                 : stats_loss(source, s);
        losses_(target, s) = stats_loss(target, s);
        cluster_worst_[source] = worst_of_row(source);
        cluster_worst_[target] = worst_of_row(target);
        resum_objective();
    }

    double worst_of_row(int cluster) const {
        double worst = -std::numeric_limits<double>::infinity();
        for (int s = 0; s < groups(); ++s) {
            const double v = losses_(cluster, s);
            if (!std::isnan(v)) worst = std::max(worst, v);
        }
        return worst;
    }

    void resum_objective() {
        objective_ = 0.0;
        for (double w : cluster_worst_) objective_ += w;
    }

    void refresh_losses() {
        const int k = clusters();
        const int g = groups();
        centroid_sqnorms_.resize(k);
        for (int c = 0; c < k; ++c) {
            centroid_sqnorms_[c] = squared_norm(centroids_.row(c));
        }
        if (losses_.rows() != static_cast<std::size_t>(k)) {
            losses_ = Matrix(static_cast<std::size_t>(k), static_cast<std::size_t>(g));
        }
        cluster_worst_.assign(k, 0.0);
        for (int c = 0; c < k; ++c) {
            for (int s = 0; s < g; ++s) {
                losses_(c, s) = stats_loss(c, s);
            }
            cluster_worst_[c] = worst_of_row(c);
        }
        resum_objective();
    }

    void rebuild() {
        stats_ = SuffStats::build(*data_, *labels_, assignment_);
        refresh_losses();
    }

    void record() {
        IterationRecord rec;
        rec.objective = objective_;
        rec.smoothed_objective = smoothed_objective();
        double km = 0.0;
        for (int c = 0; c < clusters(); ++c) {
            for (int s = 0; s < groups(); ++s) {
                const auto n = stats_.count(c, s);
                if (n > 0) km += static_cast<double>(n) * losses_(c, s);
            }
        }
        rec.kmeans_objective = km / static_cast<double>(data_->rows());
        const Disparity acd = average_cluster_disparity_from_losses(losses_);
        rec.acd = acd.value;
        rec.acd_degenerate = acd.degenerate;
        rec.group_losses = losses_.values();
        history_.push_back(std::move(rec));
    }

    const Matrix* data_;
    const GroupLabels* labels_;
    FairParams params_;
    ClusterAssignment assignment_;
    Matrix centroids_;
    SuffStats stats_;
    std::vector<double> row_sqnorms_;
    std::vector<double> centroid_sqnorms_;
    Matrix losses_;                     // clusters x groups, NaN where absent
    std::vector<double> cluster_worst_; // per cluster, max present loss
    double objective_ = 0.0;
    std::vector<IterationRecord> history_;
    long reassign_passes_ = 0;
};

/// Stopping rule over the recorded history: always stop at the iteration cap;
/// in contrastive mode, stop once the windowed percentage deterioration of the
/// k-means objective exceeds the windowed percentage improvement of the
/// fairness objective. The windowed comparison starts as soon as the history
/// spans a full window.
inline bool should_stop(std::span<const IterationRecord> history, const FairParams& params) {
    const std::size_t t = history.size();
    if (t >= static_cast<std::size_t>(params.max_iterations)) return true;
    if (params.stop_mode == StopMode::fixed) return false;
    if (t < static_cast<std::size_t>(params.stop_window) + 1) return false;

    const IterationRecord& current = history[t - 1];
    const IterationRecord& past = history[t - 1 - params.stop_window];
    if (!(past.objective > 0.0) || !(past.kmeans_objective > 0.0)) {
        throw StoppingRuleError("contrastive stop undefined: non-positive baseline objective");
    }
    const double fairness_gain = 100.0 * (past.objective - current.objective) / past.objective;
    const double utility_loss =
        100.0 * (current.kmeans_objective - past.kmeans_objective) / past.kmeans_objective;
    return utility_loss > fairness_gain;
}

inline bool FairRun::should_stop() const { return fairkm::should_stop(history_, params_); }

/// Refine an initial clustering (typically a Lloyd output) until the stopping
/// rule fires; returns the finished run with its full history.
inline FairRun run_fair(const Matrix& data, const GroupLabels& labels, const FairParams& params,
                        ClusterAssignment assignment, Matrix centroids) {
    FairRun run(data, labels, params, std::move(assignment), std::move(centroids));
    run.run();
    return run;
}

}  // namespace fairkm
