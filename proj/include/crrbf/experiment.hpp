#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "crrbf/dataset.hpp"
#include "crrbf/model_selection.hpp"
#include "crrbf/svm.hpp"

namespace crrbf {

// JSON-driven description of one experiment run. Scenarios:
//   cluster_sweep      cluster counts x trade-offs, repeated random kernels
//   fraction_sweep     training fractions at a fixed (cluster count, trade-off)
//   kernel_comparison  rbf/polynomial tuned by k-fold CV vs repeated
//                      rrbf/crrbf trials, per training fraction
struct ExperimentConfig {
    enum class Scenario { cluster_sweep, fraction_sweep, kernel_comparison };

    Scenario scenario = Scenario::cluster_sweep;

    // Exactly one data source.
    std::optional<std::filesystem::path> train_csv;
    std::optional<std::filesystem::path> test_csv;
    std::optional<SyntheticSpec> synthetic;
    int synthetic_test_per_class = 0;  // 0 -> same as samples_per_class

    bool standardize = true;  // resolved default: files on, synthetic off
    std::uint64_t seed = 0;
    int workers = 1;
    std::filesystem::path out_dir = "crrbf-out";

    TrainConfig train;
    std::vector<double> trade_offs;

    // cluster_sweep
    std::vector<int> cluster_counts = {3, 4, 5, 6, 7, 8, 9, 10};
    int repeats = 10;
    double gamma_low = 0.0;
    double gamma_high = 1.0;

    // fraction_sweep and kernel_comparison
    std::vector<double> fractions;
    std::optional<int> fixed_cluster_count;
    std::optional<double> fixed_trade_off;
    std::optional<std::filesystem::path> from_report;

    // kernel_comparison
    std::vector<std::string> comparison_kernels = {"rbf", "polynomial", "rrbf", "crrbf"};
    std::vector<double> rbf_gamma_values;
    std::vector<int> polynomial_degrees;
    int fold_count = 5;
};

// Parses and validates a config document; relative paths resolve against
// base_dir. Throws ValidationError on schema or semantic problems before any
// computation starts.
ExperimentConfig parse_experiment_config(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct ExperimentOutcome {
    int exit_code = 0;  // 0 ok, 4 when any training run failed to converge
    nlohmann::json report;
};

// Runs the configured scenario and writes report.json, report.txt,
// scores.csv, timing.csv and kernels.json into config.out_dir. A pending
// interrupt flag stops between trials and flushes a partial report.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

// Cooperative cancellation hook for SIGINT handlers.
std::atomic<bool>& interrupt_flag();

// Loads the configured data source, standardizing test data with training
// statistics when enabled. Exposed for the CLI's cluster subcommand and for
// tests.
std::pair<LabeledDataset, LabeledDataset> load_experiment_data(const ExperimentConfig& config);

}  // namespace crrbf
