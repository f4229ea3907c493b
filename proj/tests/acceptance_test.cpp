// Acceptance suite. Every test is one numbered criterion; a listener prints
// one PASS/FAIL line per criterion. Criteria 1-7 are self-contained and
// CI-scale; criteria 8-12 reproduce the reference results on the Adult and
// CreditCard datasets and need the prepared files under data/ (see README).

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>

#include "fairkm/fairkm.hpp"
#include "oracles.hpp"

using fairkm::ClusterAssignment;
using fairkm::ExperimentConfig;
using fairkm::FairParams;
using fairkm::FairRun;
using fairkm::GroupLabels;
using fairkm::Matrix;

namespace {

std::filesystem::path data_dir() {
    if (const char* env = std::getenv("FAIRKM_DATA_DIR")) return env;
    return std::filesystem::path(FAIRKM_SOURCE_DIR) / "data";
}

std::filesystem::path require_dataset(const char* name) {
    const auto path = data_dir() / name;
    if (!std::filesystem::exists(path)) {
        ADD_FAILURE() << "dataset not found: " << path
                      << "\nThe reproduction criteria need the prepared reference datasets."
                      << "\nRun scripts/fetch_data.sh (network required) or follow the manual"
                      << "\nsteps in README.md, or point FAIRKM_DATA_DIR at a prepared copy.";
    }
    return path;
}

struct SizedInstance {
    oracles::Instance instance;
    int k = 0;
    int g = 0;
    std::size_t d = 0;
};

SizedInstance random_sized_instance(std::mt19937_64& rng, std::size_t max_n, std::size_t max_d,
                                    int max_k, int max_g) {
    SizedInstance out;
    out.k = 2 + static_cast<int>(fairkm::bounded_uniform(rng, max_k - 1));
    out.g = 1 + static_cast<int>(fairkm::bounded_uniform(rng, max_g));
    out.d = 1 + fairkm::bounded_uniform(rng, max_d);
    const std::size_t floor = static_cast<std::size_t>(out.k + out.g) + 4;
    const std::size_t n = floor + fairkm::bounded_uniform(rng, max_n - floor);
    out.instance = oracles::random_instance(rng, n, out.d, out.k, out.g);
    return out;
}

FairParams params_for(const SizedInstance& sized, double phi = 3.0) {
    FairParams params;
    params.clusters = sized.k;
    params.smoothing = phi;
    return params;
}

// Campaigns shared between criteria (built on first use).
const fairkm::CampaignReport& adult_sex_campaign() {
    static const fairkm::CampaignReport report = [] {
        ExperimentConfig config;
        config.dataset_path = require_dataset("adult.csv").string();
        config.schema_ref = "adult";
        config.runs = 10;
        config.subsample = 5000;
        config.out_dir = "";
        return fairkm::run_campaign(config);
    }();
    return report;
}

const fairkm::CampaignReport& adult_race_campaign() {
    static const fairkm::CampaignReport report = [] {
        ExperimentConfig config;
        config.dataset_path = require_dataset("adult.csv").string();
        config.schema_ref = "adult";
        config.sensitive = "race";
        config.runs = 10;
        config.subsample = 5000;
        config.trace_cluster = 4;  // mirrors the reported trend figure
        return fairkm::run_campaign(config);
    }();
    return report;
}

const fairkm::CampaignReport& creditcard_campaign() {
    static const fairkm::CampaignReport report = [] {
        ExperimentConfig config;
        config.dataset_path = require_dataset("creditcard.csv").string();
        config.schema_ref = "creditcard";
        config.runs = 10;
        config.subsample = 5000;
        return fairkm::run_campaign(config);
    }();
    return report;
}

}  // namespace

// Criterion 1: the incremental move delta equals a full objective
// recomputation on 1000 random (instance, move) pairs.
TEST(Acceptance, Criterion1_MoveDeltaMatchesFullRecomputation) {
    std::mt19937_64 rng(1001);
    int checked = 0;
    while (checked < 1000) {
        const auto sized = random_sized_instance(rng, 200, 5, 4, 3);
        FairRun run(sized.instance.data, sized.instance.labels, params_for(sized),
                    sized.instance.assignment, sized.instance.centroids);
        std::size_t object = 0;
        int target = 0;
        if (!oracles::random_legal_move(rng, sized.instance, object, target)) continue;
        const double fast = run.move_delta(object, target);
        const double slow =
            oracles::move_delta(sized.instance.data, sized.instance.labels,
                                sized.instance.assignment, sized.instance.centroids, object,
                                target);
        ASSERT_NEAR(fast, slow, 1e-9 * std::max(1.0, std::abs(slow)))
            << "object " << object << " -> cluster " << target;
        ++checked;
    }
}

// Criterion 2: the analytic gradient of the smoothed objective matches
// central finite differences on 200 random states.
TEST(Acceptance, Criterion2_GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(1002);
    for (int state = 0; state < 200; ++state) {
        const auto sized = random_sized_instance(rng, 120, 5, 4, 3);
        FairRun run(sized.instance.data, sized.instance.labels, params_for(sized),
                    sized.instance.assignment, sized.instance.centroids);
        for (int c = 0; c < sized.k; ++c) {
            const auto gradient = run.centroid_gradient(c, 3.0);
            for (std::size_t j = 0; j < sized.d; ++j) {
                const double fd = oracles::smoothed_objective_fd(
                    sized.instance.data, sized.instance.labels, sized.instance.assignment,
                    sized.instance.centroids, 3.0, c, j, 1e-5);
                ASSERT_NEAR(gradient[j], fd, std::max(1e-4 * std::abs(fd), 1e-7))
                    << "state " << state << " cluster " << c << " coordinate " << j;
            }
        }
    }
}

// Criterion 3: per cluster, max loss <= soft-max term <= max + ln(present)/phi
// on 500 random states with phi in {1, 3, 10}.
TEST(Acceptance, Criterion3_SoftmaxSandwichBound) {
    std::mt19937_64 rng(1003);
    for (int state = 0; state < 500; ++state) {
        const auto sized = random_sized_instance(rng, 100, 4, 4, 3);
        FairRun run(sized.instance.data, sized.instance.labels, params_for(sized),
                    sized.instance.assignment, sized.instance.centroids);
        for (const double phi : {1.0, 3.0, 10.0}) {
            for (int c = 0; c < sized.k; ++c) {
                int present = 0;
                double hi = -std::numeric_limits<double>::infinity();
                for (int s = 0; s < sized.g; ++s) {
                    if (auto loss = run.loss(c, s)) {
                        ++present;
                        hi = std::max(hi, *loss);
                    }
                }
                const double term = fairkm::smooth_max(run.losses().row(c), phi);
                ASSERT_GE(term, hi - 1e-9);
                ASSERT_LE(term, hi + std::log(static_cast<double>(present)) / phi + 1e-9);
            }
        }
    }
}

// Criterion 4: reassignment passes never increase the objective, and at the
// fixed point no single legal move improves it (brute-force scan).
TEST(Acceptance, Criterion4_ReassignmentMonotoneToLocalOptimum) {
    std::mt19937_64 rng(1004);
    for (int trial = 0; trial < 100; ++trial) {
        const auto sized = random_sized_instance(rng, 80, 4, 4, 3);
        const auto& inst = sized.instance;
        FairRun run(inst.data, inst.labels, params_for(sized), inst.assignment, inst.centroids);

        double previous = oracles::objective(inst.data, inst.labels, run.assignment(),
                                             inst.centroids);
        for (int pass = 0; pass < 100; ++pass) {
            const std::size_t moves = run.reassign_pass();
            const double current = oracles::objective(inst.data, inst.labels, run.assignment(),
                                                      inst.centroids);
            ASSERT_LE(current, previous + 1e-9 * std::max(1.0, std::abs(previous)));
            ASSERT_NEAR(run.objective(), current, 1e-9 * std::max(1.0, std::abs(current)));
            previous = current;
            if (moves == 0) break;
        }

        std::vector<int> sizes(sized.k, 0);
        for (int c : run.assignment().cluster_of) ++sizes[c];
        for (std::size_t i = 0; i < inst.data.rows(); ++i) {
            const int source = run.assignment().cluster_of[i];
            if (sizes[source] <= 1) continue;
            for (int target = 0; target < sized.k; ++target) {
                if (target == source) continue;
                ASSERT_GE(oracles::move_delta(inst.data, inst.labels, run.assignment(),
                                              inst.centroids, i, target),
                          -1e-9);
            }
        }
    }
}

// Criterion 5: the classical objective never increases across Lloyd
// iterations on 100 random instances.
TEST(Acceptance, Criterion5_LloydObjectiveMonotone) {
    std::mt19937_64 rng(1005);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 20 + fairkm::bounded_uniform(rng, 130);
        const std::size_t d = 1 + fairkm::bounded_uniform(rng, 4);
        const int k = 2 + static_cast<int>(fairkm::bounded_uniform(rng, 4));
        Matrix data(n, d);
        for (double& v : data.values()) {
            v = static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0) * 10.0 - 5.0;
        }
        const auto result = fairkm::lloyd(data, k, trial);
        ASSERT_FALSE(result.objective_trace.empty());
        for (std::size_t t = 1; t < result.objective_trace.size(); ++t) {
            ASSERT_LE(result.objective_trace[t],
                      result.objective_trace[t - 1] * (1.0 + 1e-9) + 1e-12)
                << "trial " << trial << " iteration " << t;
        }
    }
}

// Criterion 6: the golden hand-instance values.
TEST(Acceptance, Criterion6_HandInstanceGoldenValues) {
    // Group losses 2.5 / 9.0 and cluster disparity 260 on {0(A),1(A),5(B)}.
    {
        const Matrix data = Matrix::from_rows({{0.0}, {1.0}, {5.0}});
        const GroupLabels labels{{0, 0, 1}, {"A", "B"}};
        const ClusterAssignment assignment{{0, 0, 0}, 1};
        const Matrix centroids = Matrix::from_rows({{2.0}});
        const Matrix losses = fairkm::group_loss_matrix(data, labels, assignment, centroids);
        EXPECT_DOUBLE_EQ(losses(0, 0), 2.5);
        EXPECT_DOUBLE_EQ(losses(0, 1), 9.0);
        EXPECT_DOUBLE_EQ(
            fairkm::cluster_disparity(data, labels, assignment, centroids, 0).value, 260.0);

        FairParams params;
        params.clusters = 1;
        FairRun run(data, labels, params, assignment, centroids);
        const auto gradient = run.centroid_gradient(0, 3.0);
        EXPECT_NEAR(gradient[0], -6.0, 1e-7);
        EXPECT_NEAR(gradient[0], -6.0 + 3.0567e-8, 1e-10);

        run.gradient_step(3.0, 0.01);
        EXPECT_NEAR(run.centroids()(0, 0), 2.06, 1e-7);
    }
    // The -44.625 reassignment on the two-cluster instance.
    {
        const Matrix data = Matrix::from_rows({{0.0}, {2.0}, {10.5}, {10.0}, {12.0}});
        const GroupLabels labels{{0, 1, 0, 0, 1}, {"A", "B"}};
        const ClusterAssignment assignment{{0, 0, 0, 1, 1}, 2};
        const Matrix centroids = Matrix::from_rows({{1.0}, {11.0}});
        FairParams params;
        params.clusters = 2;
        FairRun run(data, labels, params, assignment, centroids);
        EXPECT_DOUBLE_EQ(run.objective(), 46.625);
        EXPECT_DOUBLE_EQ(run.move_delta(2, 0, 1), -44.625);
        run.reassign_pass();
        EXPECT_EQ(run.assignment().cluster_of[2], 1);
        EXPECT_DOUBLE_EQ(run.objective(), 2.0);
    }
}

// Criterion 7: the symmetric four-point instance reports perfect fairness.
TEST(Acceptance, Criterion7_SymmetricInstanceMetrics) {
    const Matrix data = Matrix::from_rows({{0.0}, {2.0}, {10.0}, {12.0}});
    const GroupLabels labels{{0, 1, 0, 1}, {"A", "B"}};
    const ClusterAssignment assignment{{0, 0, 1, 1}, 2};
    const Matrix centroids = Matrix::from_rows({{1.0}, {11.0}});
    const auto report = fairkm::metric_report(data, labels, assignment, centroids);
    EXPECT_DOUBLE_EQ(report.acd, 0.0);
    EXPECT_DOUBLE_EQ(report.kmeans_objective, 1.0);
    EXPECT_DOUBLE_EQ(report.worst_group_objective, 1.0);
    EXPECT_DOUBLE_EQ(report.fair_kmeans_objective, 1.0);
}

// Criterion 8: ingesting the reference datasets reproduces the reported
// shapes exactly.
TEST(AcceptanceRepro, Criterion8_IngestionExactness) {
    const auto adult = require_dataset("adult.csv");
    const auto creditcard = require_dataset("creditcard.csv");
    if (HasFailure()) return;
    const auto started = std::chrono::steady_clock::now();

    const auto adult_sex = fairkm::load_csv(adult, fairkm::preset_schema("adult"));
    EXPECT_EQ(adult_sex.data.rows(), 30718u);
    EXPECT_EQ(adult_sex.data.cols(), 26u);
    EXPECT_EQ(adult_sex.labels.group_count(), 2);

    const auto adult_race =
        fairkm::load_csv(adult, fairkm::preset_schema("adult").with_sensitive("race"));
    EXPECT_EQ(adult_race.data.rows(), 30718u);
    EXPECT_EQ(adult_race.labels.group_count(), 5);

    const auto credit = fairkm::load_csv(creditcard, fairkm::preset_schema("creditcard"));
    EXPECT_EQ(credit.data.rows(), 30000u);
    EXPECT_EQ(credit.data.cols(), 77u);
    EXPECT_EQ(credit.labels.group_count(), 2);

    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
    EXPECT_LT(elapsed.count(), 30.0);
}

// Criterion 9: Adult/sex desk-scale campaign lands in the reported region:
// mean ACD falls by at least 40% while the k-means objective rises by at
// most 35%.
TEST(AcceptanceRepro, Criterion9_AdultSexTradeoff) {
    require_dataset("adult.csv");
    if (HasFailure()) return;
    const auto& report = adult_sex_campaign();
    EXPECT_LE(report.pct_change.acd, -40.0);
    EXPECT_LE(report.pct_change.kmeans_objective, 35.0);
}

// Criterion 10: CreditCard/SEX campaign: ACD falls by at least 50% and the
// per-cluster worst-group objective by at least 40%.
TEST(AcceptanceRepro, Criterion10_CreditCardTradeoff) {
    require_dataset("creditcard.csv");
    if (HasFailure()) return;
    const auto& report = creditcard_campaign();
    EXPECT_LE(report.pct_change.acd, -50.0);
    EXPECT_LE(report.pct_change.worst_group_objective, -40.0);
}

// Criterion 11: the assignment-level fair k-means objective deteriorates (or
// at best holds) under the cluster-level method, as reported.
TEST(AcceptanceRepro, Criterion11_FairKmeansObjectiveDeteriorates) {
    require_dataset("adult.csv");
    if (HasFailure()) return;
    const auto& report = adult_sex_campaign();
    EXPECT_GE(report.pct_change.fair_kmeans_objective, 0.0);
}

// Criterion 12: Adult/race trend properties: ACD improves in at least 9 of
// 10 seeds, and the traced cluster's worst-off group changes identity at
// least once in a majority of seeds.
TEST(AcceptanceRepro, Criterion12_AdultRaceTrends) {
    require_dataset("adult.csv");
    if (HasFailure()) return;
    const auto& report = adult_race_campaign();

    int improved = 0;
    int identity_changes = 0;
    int usable = 0;
    for (const auto& outcome : report.outcomes) {
        if (outcome.skipped) continue;
        ++usable;
        if (outcome.fair.acd < outcome.classical.acd) ++improved;

        const std::size_t groups = report.group_names.size();
        const int traced = *report.config.trace_cluster;
        int last_worst = -1;
        bool changed = false;
        for (const auto& rec : outcome.history) {
            int worst = -1;
            double worst_loss = -std::numeric_limits<double>::infinity();
            for (std::size_t s = 0; s < groups; ++s) {
                const double loss = rec.group_losses[traced * groups + s];
                if (!std::isnan(loss) && loss > worst_loss) {
                    worst_loss = loss;
                    worst = static_cast<int>(s);
                }
            }
            if (last_worst != -1 && worst != last_worst) changed = true;
            last_worst = worst;
        }
        if (changed) ++identity_changes;
    }
    ASSERT_GE(usable, 10);
    EXPECT_GE(improved, 9) << "final ACD must beat the initial ACD in at least 9 of 10 seeds";
    EXPECT_GT(identity_changes * 2, usable)
        << "the traced cluster's worst-off group should change in a majority of seeds";
}

namespace {

class CriterionPrinter : public ::testing::EmptyTestEventListener {
    void OnTestEnd(const ::testing::TestInfo& info) override {
        std::cout << "[CRITERION] " << info.name() << ": "
                  << (info.result()->Passed() ? "PASS" : "FAIL") << std::endl;
    }
};

}  // namespace

int main(int argc, char** argv) {
    ::testing::InitGoogleTest(&argc, argv);
    ::testing::UnitTest::GetInstance()->listeners().Append(new CriterionPrinter);
    return RUN_ALL_TESTS();
}
