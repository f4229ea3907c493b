#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fairkm/fair.hpp"
#include "fairkm/ingest.hpp"
#include "fairkm/kmeans.hpp"
#include "fairkm/metrics.hpp"
#include "fairkm/random.hpp"
#include "fairkm/version.hpp"

namespace fairkm {

/// Everything one experiment campaign needs: dataset, schema, parameters,
/// seed protocol and output destination.
struct ExperimentConfig {
    std::string dataset_path;
    std::string schema_ref;          // preset name or schema file path
    std::string sensitive;           // column name; empty keeps the schema's
    FairParams params;               // k, phi, eta, iteration cap, stop rule
    int runs = 100;
    std::uint64_t base_seed = 0;
    std::size_t subsample = 0;       // 0 = use the full dataset
    std::optional<int> trace_cluster;
    std::string out_dir;
    int jobs = 0;                    // 0 = hardware concurrency
    int lloyd_max_iterations = 300;
};

/// Outcome of one seed: the classical baseline snapshot and the refined
/// result, or a logged skip on numerical degeneracy.
struct SeedOutcome {
    std::uint64_t seed = 0;
    MetricReport classical;
    MetricReport fair;
    int lloyd_iterations = 0;
    int fair_iterations = 0;
    bool skipped = false;
    std::string skip_reason;
    std::vector<IterationRecord> history;  // retained only when tracing
};

struct MetricMeans {
    double acd = 0.0;
    double kmeans_objective = 0.0;
    double worst_group_objective = 0.0;
    double fair_kmeans_objective = 0.0;
};

struct CampaignReport {
    ExperimentConfig config;
    std::size_t objects = 0;
    std::size_t features = 0;
    std::vector<std::string> group_names;
    std::vector<std::int64_t> group_counts;
    std::size_t rows_dropped = 0;
    std::vector<SeedOutcome> outcomes;  // ascending seed order
    MetricMeans classical_mean;
    MetricMeans fair_mean;
    MetricMeans pct_change;             // ours vs classical, on the means
    std::size_t seeds_used = 0;
    std::vector<std::uint64_t> seeds_skipped;
};

/// Seeded uniform row subsample (without replacement, original order kept).
inline ProcessedDataset subsample_rows(const ProcessedDataset& dataset, std::size_t count,
                                       std::uint64_t seed) {
    if (count == 0 || count >= dataset.data.rows()) return dataset;
    std::mt19937_64 rng(seed);
    auto picks = sample_without_replacement(dataset.data.rows(), count, rng);
    std::sort(picks.begin(), picks.end());

    ProcessedDataset out;
    out.feature_names = dataset.feature_names;
    out.rows_dropped = dataset.rows_dropped;
    out.labels.names = dataset.labels.names;
    out.data = Matrix(count, dataset.data.cols());
    out.labels.group_of.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto src = dataset.data.row(picks[i]);
        std::copy(src.begin(), src.end(), out.data.row(i).begin());
        out.labels.group_of[i] = dataset.labels.group_of[picks[i]];
    }
    const auto counts = out.group_counts();
    for (std::size_t s = 0; s < counts.size(); ++s) {
        if (counts[s] == 0) {
            throw DegenerateGroupError("group " + out.labels.names[s] +
                                       " vanished from the subsample; increase --subsample");
        }
    }
    return out;
}

namespace detail {

inline double percent_change(double reference, double value) {
    if (reference == 0.0) return value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return 100.0 * (value - reference) / reference;
}

inline void accumulate(MetricMeans& means, const MetricReport& report) {
    means.acd += report.acd;
    means.kmeans_objective += report.kmeans_objective;
    means.worst_group_objective += report.worst_group_objective;
    means.fair_kmeans_objective += report.fair_kmeans_objective;
}

inline void divide(MetricMeans& means, double n) {
    means.acd /= n;
    means.kmeans_objective /= n;
    means.worst_group_objective /= n;
    means.fair_kmeans_objective /= n;
}

}  // namespace detail

/// One seed end to end: Lloyd baseline, snapshot, refinement, snapshot.
inline SeedOutcome run_seed(const Matrix& data, const GroupLabels& labels,
                            const ExperimentConfig& config, std::uint64_t seed) {
    SeedOutcome outcome;
    outcome.seed = seed;
    const LloydResult baseline =
        lloyd(data, config.params.clusters, seed, config.lloyd_max_iterations);
    outcome.classical = metric_report(data, labels, baseline.assignment, baseline.centroids);
    outcome.lloyd_iterations = baseline.iterations;

    try {
        FairRun run =
            run_fair(data, labels, config.params, baseline.assignment, baseline.centroids);
        outcome.fair = metric_report(data, labels, run.assignment(), run.centroids());
        outcome.fair_iterations = run.iteration();
        if (config.trace_cluster.has_value()) outcome.history = run.history();
    } catch (const StoppingRuleError& e) {
        outcome.skipped = true;
        outcome.skip_reason = e.what();
        return outcome;
    }
    if (outcome.classical.acd_degenerate || outcome.fair.acd_degenerate) {
        outcome.skipped = true;
        outcome.skip_reason = "degenerate cluster disparity (capped near-zero best-off loss)";
    }
    return outcome;
}

/// Run the full multi-seed campaign. Seeds are independent and dispatched to
/// a small worker pool; aggregation is by ascending seed so the report does
/// not depend on scheduling.
inline CampaignReport run_campaign(const ExperimentConfig& config) {
    DatasetSchema schema = resolve_schema(config.schema_ref);
    if (!config.sensitive.empty()) schema = schema.with_sensitive(config.sensitive);

    ProcessedDataset dataset = load_csv(config.dataset_path, schema);
    if (config.subsample > 0) {
        dataset = subsample_rows(dataset, config.subsample, config.base_seed);
    }

    CampaignReport report;
    report.config = config;
    report.objects = dataset.data.rows();
    report.features = dataset.data.cols();
    report.group_names = dataset.labels.names;
    report.group_counts = dataset.group_counts();
    report.rows_dropped = dataset.rows_dropped;
    if (config.trace_cluster.has_value() &&
        (*config.trace_cluster < 0 || *config.trace_cluster >= config.params.clusters)) {
        throw ArgumentError("trace cluster index out of range");
    }

    report.outcomes.resize(static_cast<std::size_t>(config.runs));
    std::vector<std::exception_ptr> failures(report.outcomes.size());
    std::atomic<std::size_t> next{0};
    const unsigned hw = std::thread::hardware_concurrency();
    const unsigned workers =
        std::min<unsigned>(config.jobs > 0 ? static_cast<unsigned>(config.jobs)
                                           : std::max(1u, hw),
                           static_cast<unsigned>(config.runs));
    auto work = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= report.outcomes.size()) break;
            try {
                report.outcomes[i] =
                    run_seed(dataset.data, dataset.labels, config, config.base_seed + i);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (const auto& failure : failures) {
        if (failure) std::rethrow_exception(failure);
    }

    for (const auto& outcome : report.outcomes) {
        if (outcome.skipped) {
            report.seeds_skipped.push_back(outcome.seed);
            std::cerr << "fairkm: seed " << outcome.seed << " skipped: " << outcome.skip_reason
                      << "\n";
            continue;
        }
        ++report.seeds_used;
        detail::accumulate(report.classical_mean, outcome.classical);
        detail::accumulate(report.fair_mean, outcome.fair);
    }
    if (report.seeds_used == 0) {
        throw InvariantError("every seed of the campaign was skipped as degenerate");
    }
    detail::divide(report.classical_mean, static_cast<double>(report.seeds_used));
    detail::divide(report.fair_mean, static_cast<double>(report.seeds_used));
    report.pct_change.acd = detail::percent_change(report.classical_mean.acd, report.fair_mean.acd);
    report.pct_change.kmeans_objective = detail::percent_change(
        report.classical_mean.kmeans_objective, report.fair_mean.kmeans_objective);
    report.pct_change.worst_group_objective = detail::percent_change(
        report.classical_mean.worst_group_objective, report.fair_mean.worst_group_objective);
    report.pct_change.fair_kmeans_objective = detail::percent_change(
        report.classical_mean.fair_kmeans_objective, report.fair_mean.fair_kmeans_objective);
    return report;
}

inline std::string format_percent(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%+.2f%%", v);
    return buf;
}

inline std::string format_fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

/// Per-iteration trace of one cluster: its per-group losses plus the three
/// whole-clustering series.
inline void emit_trace(const std::vector<IterationRecord>& history,
                       const std::vector<std::string>& group_names, int cluster, int clusters,
                       const std::filesystem::path& path) {
    if (cluster < 0 || cluster >= clusters) {
        throw ArgumentError("trace cluster index out of range");
    }
    CsvWriter writer(path);
    std::vector<std::string> header = {"iteration", "objective", "kmeans_objective", "acd"};
    for (const auto& name : group_names) header.push_back("loss_" + name);
    writer.row(header);
    const std::size_t groups = group_names.size();
    for (std::size_t t = 0; t < history.size(); ++t) {
        const auto& rec = history[t];
        std::vector<std::string> fields = {std::to_string(t + 1), format_double(rec.objective),
                                           format_double(rec.kmeans_objective),
                                           format_double(rec.acd)};
        for (std::size_t s = 0; s < groups; ++s) {
            const double loss = rec.group_losses[static_cast<std::size_t>(cluster) * groups + s];
            fields.push_back(std::isnan(loss) ? "" : format_double(loss));
        }
        writer.row(fields);
    }
}

/// One CSV per reported table: rows {classical k-means, ours}, columns
/// {value, % change vs classical}.
inline void render_tables(const CampaignReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    struct Entry {
        const char* file;
        double MetricMeans::*field;
    };
    const Entry entries[] = {
        {"acd.csv", &MetricMeans::acd},
        {"kmeans.csv", &MetricMeans::kmeans_objective},
        {"ours.csv", &MetricMeans::worst_group_objective},
        {"fair_kmeans.csv", &MetricMeans::fair_kmeans_objective},
    };
    for (const auto& entry : entries) {
        CsvWriter writer(dir / entry.file);
        writer.raw_row("method,value,pct_change");
        writer.row({"classical_kmeans", format_fixed(report.classical_mean.*entry.field),
                    "0.00%"});
        writer.row({"ours", format_fixed(report.fair_mean.*entry.field),
                    format_percent(report.pct_change.*entry.field)});
    }
}

inline nlohmann::ordered_json campaign_json(const CampaignReport& report) {
    nlohmann::ordered_json j;
    const auto& config = report.config;
    j["config"] = {
        {"dataset", config.dataset_path},
        {"schema", config.schema_ref},
        {"sensitive", config.sensitive},
        {"k", config.params.clusters},
        {"phi", config.params.smoothing},
        {"eta", config.params.learning_rate},
        {"runs", config.runs},
        {"base_seed", config.base_seed},
        {"max_iters", config.params.max_iterations},
        {"stop_mode", config.params.stop_mode == StopMode::fixed ? "fixed" : "contrastive"},
        {"stop_window", config.params.stop_window},
        {"subsample", config.subsample},
        {"trace_cluster",
         config.trace_cluster ? nlohmann::ordered_json(*config.trace_cluster)
                              : nlohmann::ordered_json(nullptr)},
        {"lloyd_max_iterations", config.lloyd_max_iterations},
    };
    j["dataset"] = {
        {"objects", report.objects},
        {"features", report.features},
        {"groups", report.group_names.size()},
        {"group_names", report.group_names},
        {"group_counts", report.group_counts},
        {"rows_dropped", report.rows_dropped},
    };
    j["environment"] = {
        {"fairkm_version", kVersion},
        {"compiler", kCompiler},
    };
    auto means = [](const MetricMeans& m) {
        return nlohmann::ordered_json{
            {"acd", m.acd},
            {"kmeans_objective", m.kmeans_objective},
            {"worst_group_objective", m.worst_group_objective},
            {"fair_kmeans_objective", m.fair_kmeans_objective},
        };
    };
    j["aggregate"] = {
        {"classical", means(report.classical_mean)},
        {"ours", means(report.fair_mean)},
        {"pct_change", means(report.pct_change)},
        {"seeds_used", report.seeds_used},
        {"seeds_skipped", report.seeds_skipped},
    };
    return j;
}

/// Write per_seed.csv, tables/, campaign.json and any traces under `dir`.
inline void write_campaign(const CampaignReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    CsvWriter per_seed(dir / "per_seed.csv");
    per_seed.raw_row("seed,method,lloyd_iterations,fair_iterations,skipped," +
                     metric_csv_header());
    for (const auto& outcome : report.outcomes) {
        const std::string base = std::to_string(outcome.seed);
        per_seed.raw_row(base + ",classical_kmeans," + std::to_string(outcome.lloyd_iterations) +
                         ",0," + (outcome.skipped ? "1" : "0") + "," +
                         metric_csv_row(outcome.classical));
        if (!outcome.skipped) {
            per_seed.raw_row(base + ",ours," + std::to_string(outcome.lloyd_iterations) + "," +
                             std::to_string(outcome.fair_iterations) + ",0," +
                             metric_csv_row(outcome.fair));
        }
    }

    render_tables(report, dir / "tables");

    if (report.config.trace_cluster.has_value()) {
        for (const auto& outcome : report.outcomes) {
            if (outcome.skipped || outcome.history.empty()) continue;
            const std::string name = "trace_seed" + std::to_string(outcome.seed) + "_cluster" +
                                     std::to_string(*report.config.trace_cluster) + ".csv";
            emit_trace(outcome.history, report.group_names, *report.config.trace_cluster,
                       report.config.params.clusters, dir / name);
        }
    }

    std::ofstream json_out(dir / "campaign.json");
    if (!json_out) throw IoError("cannot write campaign.json");
    json_out << campaign_json(report).dump(2) << "\n";
}

}  // namespace fairkm
