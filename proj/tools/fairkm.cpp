// fairkm command line: dataset ingestion audit and multi-seed experiment runs.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fairkm/fairkm.hpp"

namespace {

fairkm::DatasetSchema resolve(const std::string& schema_ref, const std::string& sensitive) {
    fairkm::DatasetSchema schema = fairkm::resolve_schema(schema_ref);
    if (!sensitive.empty()) schema = schema.with_sensitive(sensitive);
    return schema;
}

int run_ingest(const std::string& dataset, const std::string& schema_ref,
               const std::string& sensitive, bool audit, const std::string& dump) {
    const auto schema = resolve(schema_ref, sensitive);
    const auto processed = fairkm::load_csv(dataset, schema);

    std::cout << "objects: " << processed.data.rows() << "\n"
              << "features: " << processed.data.cols() << "\n"
              << "groups: " << processed.labels.group_count() << "\n"
              << "rows dropped: " << processed.rows_dropped << "\n";
    if (audit) {
        const auto counts = processed.group_counts();
        for (int s = 0; s < processed.labels.group_count(); ++s) {
            std::cout << "group " << processed.labels.names[s] << ": " << counts[s] << "\n";
        }
    }
    if (!dump.empty()) {
        fairkm::write_processed_csv(processed, dump);
        std::cout << "processed dataset written to " << dump << "\n";
    }
    return 0;
}

int run_campaign_command(const fairkm::ExperimentConfig& config) {
    const auto report = fairkm::run_campaign(config);
    fairkm::write_campaign(report, config.out_dir);

    auto line = [](const char* name, double classical, double ours, double pct) {
        std::cout << name << ": classical " << fairkm::format_fixed(classical) << ", ours "
                  << fairkm::format_fixed(ours) << " (" << fairkm::format_percent(pct) << ")\n";
    };
    std::cout << "seeds used: " << report.seeds_used << "/" << report.config.runs << "\n";
    line("average cluster disparity", report.classical_mean.acd, report.fair_mean.acd,
         report.pct_change.acd);
    line("k-means objective", report.classical_mean.kmeans_objective,
         report.fair_mean.kmeans_objective, report.pct_change.kmeans_objective);
    line("worst-group objective", report.classical_mean.worst_group_objective,
         report.fair_mean.worst_group_objective, report.pct_change.worst_group_objective);
    line("fair k-means objective", report.classical_mean.fair_kmeans_objective,
         report.fair_mean.fair_kmeans_objective, report.pct_change.fair_kmeans_objective);
    std::cout << "outputs written to " << config.out_dir << "\n";
    return 0;
}

int parse_trace_cluster(const std::string& arg) {
    std::string value = arg;
    if (value.rfind("cluster=", 0) == 0) value = value.substr(8);
    try {
        return std::stoi(value);
    } catch (const std::exception&) {
        throw fairkm::ArgumentError("cannot parse --trace argument '" + arg +
                                    "'; expected cluster=<index>");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cluster-level group representativity fairness for k-means"};
    app.require_subcommand(1);

    // ingest
    std::string dataset, schema_ref, sensitive, dump;
    bool audit = false;
    auto* ingest = app.add_subcommand("ingest", "load a dataset and print its processed shape");
    ingest->add_option("--dataset", dataset, "CSV file with a header row")->required();
    ingest->add_option("--schema", schema_ref, "schema preset (adult, creditcard) or file")
        ->required();
    ingest->add_option("--sensitive", sensitive, "override the schema's sensitive column");
    ingest->add_flag("--audit", audit, "print per-group counts");
    ingest->add_option("--dump", dump, "write the processed dataset to this CSV file");

    // run
    fairkm::ExperimentConfig config;
    std::string stop_mode = "fixed";
    std::string trace_arg;
    auto* run = app.add_subcommand("run", "multi-seed experiment campaign");
    run->add_option("--dataset", config.dataset_path, "CSV file with a header row")->required();
    run->add_option("--schema", config.schema_ref, "schema preset (adult, creditcard) or file")
        ->required();
    run->add_option("--sensitive", config.sensitive, "override the schema's sensitive column");
    run->add_option("--k", config.params.clusters, "cluster count");
    run->add_option("--phi", config.params.smoothing, "soft-max sharpness");
    run->add_option("--eta", config.params.learning_rate, "centroid learning rate");
    run->add_option("--runs", config.runs, "number of seeds");
    run->add_option("--seed", config.base_seed, "first seed; later runs use seed+1, seed+2, ...");
    run->add_option("--max-iters", config.params.max_iterations, "refinement iteration cap");
    run->add_option("--stop", stop_mode, "stopping rule: fixed or contrastive");
    run->add_option("--stop-window", config.params.stop_window, "contrastive lookback window");
    run->add_option("--subsample", config.subsample, "seeded uniform row subsample (0 = all)");
    run->add_option("--trace", trace_arg, "emit per-iteration traces, e.g. --trace cluster=4");
    run->add_option("--jobs", config.jobs, "worker threads (0 = hardware concurrency)");
    run->add_option("--out", config.out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) return run_ingest(dataset, schema_ref, sensitive, audit, dump);
        if (stop_mode == "fixed") {
            config.params.stop_mode = fairkm::StopMode::fixed;
        } else if (stop_mode == "contrastive") {
            config.params.stop_mode = fairkm::StopMode::contrastive;
        } else {
            throw fairkm::ArgumentError("--stop must be fixed or contrastive");
        }
        if (!trace_arg.empty()) config.trace_cluster = parse_trace_cluster(trace_arg);
        return run_campaign_command(config);
    } catch (const std::exception& e) {
        std::cerr << "fairkm: " << e.what() << "\n";
        return 1;
    }
}
