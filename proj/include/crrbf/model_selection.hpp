#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crrbf/dataset.hpp"
#include "crrbf/kernels.hpp"
#include "crrbf/metrics.hpp"
#include "crrbf/svm.hpp"

namespace crrbf {

struct Fold {
    std::vector<int> train_indices;
    std::vector<int> validation_indices;
};

// Per class, fold sizes differ by at most one; folds partition all indices.
// Throws ValidationError naming the class when one is smaller than fold_count.
std::vector<Fold> stratified_kfold(std::span<const int> labels, int fold_count,
                                   std::uint64_t seed);

struct CvResult {
    double mean_accuracy = 0.0;
    bool any_non_converged = false;
};

// Trains on each fold complement and averages the held-out overall accuracy.
// The Gram matrix is computed once on the full dataset and sliced per fold.
CvResult cross_validate_detail(const LabeledDataset& ds, const KernelSpec& spec,
                               const TrainConfig& config, const std::vector<Fold>& folds);
double cross_validate(const LabeledDataset& ds, const KernelSpec& spec,
                      const TrainConfig& config, const std::vector<Fold>& folds);

enum class KernelFamily { linear, polynomial, rbf, rrbf, crrbf };

KernelFamily kernel_family_from_name(const std::string& name);
const char* kernel_family_name(KernelFamily family);

// The paper's trade-off grid {1, 2, 4, ..., 1024}.
std::vector<double> default_trade_off_grid();
// Reading of "0.01 to 20, step 1": {0.01, 1.01, ..., 19.01} plus the endpoint
// 20; 21 values.
std::vector<double> default_rbf_gamma_grid();
std::vector<int> default_polynomial_degree_grid();

struct GridSpec {
    std::vector<double> trade_off_values = default_trade_off_grid();
    std::vector<double> rbf_gamma_values = default_rbf_gamma_grid();
    std::vector<int> polynomial_degrees = default_polynomial_degree_grid();
    int fold_count = 5;
    std::uint64_t seed = 0;

    void validate() const;
};

struct GridPoint {
    double trade_off = 0.0;
    std::optional<double> kernel_parameter;  // gamma or degree; empty for linear
    double mean_accuracy = 0.0;
};

struct GridSearchResult {
    GridPoint best;
    std::vector<GridPoint> table;
    bool any_non_converged = false;
    double seconds = 0.0;  // wall clock of the whole search

    KernelSpec best_spec(KernelFamily family) const;
};

// Exhaustive search over the family's grid; ties go to the smaller trade-off,
// then the smaller kernel parameter. Only linear, polynomial and rbf are
// grid-searchable; the random families are evaluated by repeated trials.
GridSearchResult grid_search(const LabeledDataset& ds, KernelFamily family,
                             const GridSpec& grid, const TrainConfig& base_config,
                             int workers = 1);

struct TrialPlan {
    std::vector<int> cluster_counts = {3, 4, 5, 6, 7, 8, 9, 10};
    int repeats = 10;
    GammaSampler sampler;  // seed field is ignored; per-trial seeds are derived
    std::uint64_t base_seed = 0;

    void validate(std::size_t band_count) const;
};

// Everything measured for one random-kernel trial.
struct TrialOutcome {
    double test_accuracy = 0.0;
    double test_kappa = 0.0;
    double seconds = 0.0;  // train + predict wall clock for this trade-off
    bool converged = true;
};

// Results of the cluster-count sweep, indexed [cluster index][trade-off
// index][repeat]. When a run is cancelled, untouched repeats stay flagged in
// `completed` and every statistic aggregates the finished repeats only.
struct CrrbfTrialTable {
    std::vector<int> cluster_counts;
    std::vector<double> trade_offs;
    std::vector<std::vector<std::vector<TrialOutcome>>> outcomes;
    std::vector<std::vector<Crrbf>> kernels;     // [cluster index][repeat]
    std::vector<std::vector<char>> completed;    // [cluster index][repeat]
    TimingRecord timing;

    std::size_t completed_repeats(std::size_t k_index) const;
    TrialStats accuracy_stats(std::size_t k_index, std::size_t c_index,
                              StdConvention convention = StdConvention::sample) const;
    TrialStats kappa_stats(std::size_t k_index, std::size_t c_index,
                           StdConvention convention = StdConvention::sample) const;
    double cell_seconds(std::size_t k_index, std::size_t c_index) const;
    // Max over trade-offs of the mean-over-repeats accuracy (mean then max).
    double best_mean_accuracy(std::size_t k_index, std::size_t* best_c_index = nullptr) const;
    // Mean over repeats of the per-repeat max over trade-offs (max then mean).
    double mean_best_accuracy(std::size_t k_index) const;
    bool any_non_converged() const;
};

// The cluster-count sweep of the first experimental scenario: for each
// cluster count k and repeat r, bands are clustered and gammas sampled with
// seeds derived from (base_seed, k, r), then one model per trade-off value is
// trained on the full training set and scored on the test set. A set cancel
// flag stops scheduling further trials.
CrrbfTrialTable run_crrbf_trials(const LabeledDataset& ds_train, const LabeledDataset& ds_test,
                                 const TrialPlan& plan, std::span<const double> trade_offs,
                                 const TrainConfig& base_config, int workers = 1,
                                 const std::atomic<bool>* cancel = nullptr);

// Sweep over training fractions at a fixed cluster count and trade-off.
// Repeat r of any fraction reuses the trial seeds of run_crrbf_trials, so the
// fraction 1.0 column reproduces that table's cells exactly.
struct FractionSweepRow {
    double fraction = 0.0;
    std::vector<TrialOutcome> outcomes;
    std::vector<Crrbf> kernels;    // one sampled kernel per repeat
    std::vector<char> completed;   // per repeat

    std::size_t completed_repeats() const;
    TrialStats accuracy_stats(StdConvention convention = StdConvention::sample) const;
    TrialStats kappa_stats(StdConvention convention = StdConvention::sample) const;
    double total_seconds() const;
};

std::vector<FractionSweepRow> training_fraction_sweep(
    const LabeledDataset& ds_train, const LabeledDataset& ds_test,
    std::span<const double> fractions, int cluster_count, double trade_off, int repeats,
    const GammaSampler& sampler, std::uint64_t base_seed, const TrainConfig& base_config,
    int workers = 1, const std::atomic<bool>* cancel = nullptr);

}  // namespace crrbf
