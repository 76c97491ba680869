#include "crrbf/model_selection.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "crrbf/errors.hpp"
#include "crrbf/parallel.hpp"
#include "crrbf/rng.hpp"

namespace crrbf {

std::vector<Fold> stratified_kfold(std::span<const int> labels, int fold_count,
                                   std::uint64_t seed) {
    if (fold_count < 2) throw std::invalid_argument("stratified_kfold: fold_count must be >= 2");
    int class_count = 0;
    for (int label : labels) class_count = std::max(class_count, label + 1);

    std::vector<std::vector<int>> by_class(class_count);
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[labels[i]].push_back(static_cast<int>(i));
    for (int c = 0; c < class_count; ++c) {
        if (by_class[c].size() < static_cast<std::size_t>(fold_count))
            throw ValidationError("stratified_kfold: class " + std::to_string(c) + " has " +
                                  std::to_string(by_class[c].size()) +
                                  " samples, fewer than fold_count " +
                                  std::to_string(fold_count));
    }

    // Shuffle within each class, then deal round-robin so per-class fold
    // sizes differ by at most one.
    Rng rng(seed);
    std::vector<std::vector<int>> validation(fold_count);
    for (auto& class_indices : by_class) {
        rng.shuffle(class_indices);
        for (std::size_t i = 0; i < class_indices.size(); ++i)
            validation[i % fold_count].push_back(class_indices[i]);
    }

    std::vector<Fold> folds(fold_count);
    for (int f = 0; f < fold_count; ++f) {
        std::sort(validation[f].begin(), validation[f].end());
        std::vector<bool> held(labels.size(), false);
        for (int i : validation[f]) held[i] = true;
        folds[f].validation_indices = std::move(validation[f]);
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (!held[i]) folds[f].train_indices.push_back(static_cast<int>(i));
    }
    return folds;
}

namespace {

// One-vs-one machinery on precomputed kernel matrices, shared by
// cross-validation (kernel matrix = full training Gram, evaluation rows are
// held-out indices) and by test-set trials (kernel matrix = test x train
// cross Gram). Support vectors are tracked as column indices into those
// matrices, so nothing is ever re-evaluated.
struct GramOvoModel {
    struct GramPair {
        int class_a, class_b;
        std::vector<int> support_cols;
        std::vector<double> alphas, signed_labels;
        double bias;
    };
    std::vector<GramPair> pairs;
    std::vector<std::pair<int, int>> class_pairs;
    int class_count = 0;
    bool any_non_converged = false;
};

GramOvoModel train_ovo_on_gram(const Matrix& train_gram, std::span<const int> train_rows,
                               std::span<const int> all_labels, int class_count,
                               const TrainConfig& config) {
    GramOvoModel model;
    model.class_count = class_count;
    for (int a = 0; a < class_count; ++a) {
        for (int b = a + 1; b < class_count; ++b) {
            std::vector<int> rows;
            for (int r : train_rows)
                if (all_labels[r] == a || all_labels[r] == b) rows.push_back(r);

            Matrix sub(rows.size(), rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i)
                for (std::size_t j = 0; j < rows.size(); ++j)
                    sub(i, j) = train_gram(rows[i], rows[j]);
            std::vector<double> signed_labels(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i)
                signed_labels[i] = all_labels[rows[i]] == a ? 1.0 : -1.0;

            const BinarySvmModel binary = train_binary(sub, signed_labels, config);
            model.any_non_converged = model.any_non_converged || !binary.converged;

            GramOvoModel::GramPair p;
            p.class_a = a;
            p.class_b = b;
            for (std::size_t s = 0; s < binary.support_indices.size(); ++s)
                p.support_cols.push_back(rows[binary.support_indices[s]]);
            p.alphas = binary.alphas;
            p.signed_labels = binary.signed_labels;
            p.bias = binary.bias;
            model.class_pairs.emplace_back(a, b);
            model.pairs.push_back(std::move(p));
        }
    }
    return model;
}

// score_matrix(row, support_col) must hold the kernel between evaluation row
// `row` and the training sample `support_col` refers to.
std::vector<int> predict_on_gram(const GramOvoModel& model, const Matrix& score_matrix,
                                 std::span<const int> eval_rows) {
    std::vector<int> predictions(eval_rows.size());
    std::vector<double> decisions(model.pairs.size());
    for (std::size_t e = 0; e < eval_rows.size(); ++e) {
        for (std::size_t p = 0; p < model.pairs.size(); ++p) {
            const auto& pair = model.pairs[p];
            double f = pair.bias;
            for (std::size_t s = 0; s < pair.support_cols.size(); ++s)
                f += pair.alphas[s] * pair.signed_labels[s] *
                     score_matrix(eval_rows[e], pair.support_cols[s]);
            decisions[p] = f;
        }
        predictions[e] = ovo_vote(model.class_pairs, decisions, model.class_count);
    }
    return predictions;
}

CvResult cross_validate_on_gram(const Matrix& full_gram, const LabeledDataset& ds,
                                const TrainConfig& config, const std::vector<Fold>& folds) {
    CvResult result;
    double sum = 0.0;
    for (const Fold& fold : folds) {
        const GramOvoModel model = train_ovo_on_gram(full_gram, fold.train_indices, ds.labels,
                                                     ds.class_count, config);
        result.any_non_converged = result.any_non_converged || model.any_non_converged;
        const std::vector<int> predictions =
            predict_on_gram(model, full_gram, fold.validation_indices);
        std::vector<int> truth;
        truth.reserve(fold.validation_indices.size());
        for (int i : fold.validation_indices) truth.push_back(ds.labels[i]);
        sum += overall_accuracy(confusion(truth, predictions, ds.class_count));
    }
    result.mean_accuracy = sum / static_cast<double>(folds.size());
    return result;
}

}  // namespace

CvResult cross_validate_detail(const LabeledDataset& ds, const KernelSpec& spec,
                               const TrainConfig& config, const std::vector<Fold>& folds) {
    ds.validate();
    if (folds.empty()) throw std::invalid_argument("cross_validate: no folds");
    return cross_validate_on_gram(gram(spec, ds.features), ds, config, folds);
}

double cross_validate(const LabeledDataset& ds, const KernelSpec& spec,
                      const TrainConfig& config, const std::vector<Fold>& folds) {
    return cross_validate_detail(ds, spec, config, folds).mean_accuracy;
}

KernelFamily kernel_family_from_name(const std::string& name) {
    if (name == "linear") return KernelFamily::linear;
    if (name == "polynomial") return KernelFamily::polynomial;
    if (name == "rbf") return KernelFamily::rbf;
    if (name == "rrbf") return KernelFamily::rrbf;
    if (name == "crrbf") return KernelFamily::crrbf;
    throw ValidationError("unknown kernel family '" + name +
                          "'; valid families: linear, polynomial, rbf, rrbf, crrbf");
}

const char* kernel_family_name(KernelFamily family) {
    switch (family) {
        case KernelFamily::linear: return "linear";
        case KernelFamily::polynomial: return "polynomial";
        case KernelFamily::rbf: return "rbf";
        case KernelFamily::rrbf: return "rrbf";
        case KernelFamily::crrbf: return "crrbf";
    }
    return "?";
}

std::vector<double> default_trade_off_grid() {
    return {1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024};
}

std::vector<double> default_rbf_gamma_grid() {
    std::vector<double> grid;
    for (int i = 0; i < 20; ++i) grid.push_back(0.01 + static_cast<double>(i));
    grid.push_back(20.0);
    return grid;
}

std::vector<int> default_polynomial_degree_grid() {
    return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
}

void GridSpec::validate() const {
    if (trade_off_values.empty())
        throw std::invalid_argument("grid: trade_off_values must be non-empty");
    for (double c : trade_off_values)
        if (!(c > 0.0)) throw std::invalid_argument("grid: trade-off values must be positive");
    if (fold_count < 2) throw std::invalid_argument("grid: fold_count must be >= 2");
}

KernelSpec GridSearchResult::best_spec(KernelFamily family) const {
    switch (family) {
        case KernelFamily::linear: return Linear{};
        case KernelFamily::polynomial:
            return Polynomial{static_cast<int>(*best.kernel_parameter)};
        case KernelFamily::rbf: return Rbf{*best.kernel_parameter};
        default:
            throw std::invalid_argument("best_spec: random kernel families have no grid");
    }
}

GridSearchResult grid_search(const LabeledDataset& ds, KernelFamily family,
                             const GridSpec& grid, const TrainConfig& base_config,
                             int workers) {
    const auto start = std::chrono::steady_clock::now();
    ds.validate();
    grid.validate();

    // Kernel parameter axis per family; empty marker for the linear kernel.
    std::vector<std::optional<double>> parameters;
    switch (family) {
        case KernelFamily::linear:
            parameters.push_back(std::nullopt);
            break;
        case KernelFamily::polynomial:
            if (grid.polynomial_degrees.empty())
                throw std::invalid_argument("grid_search: empty polynomial degree grid");
            for (int degree : grid.polynomial_degrees) {
                if (degree < 1)
                    throw std::invalid_argument("grid_search: degrees must be >= 1");
                parameters.emplace_back(static_cast<double>(degree));
            }
            break;
        case KernelFamily::rbf:
            if (grid.rbf_gamma_values.empty())
                throw std::invalid_argument("grid_search: empty rbf gamma grid");
            for (double gamma : grid.rbf_gamma_values) {
                if (!(gamma > 0.0))
                    throw std::invalid_argument("grid_search: gammas must be positive");
                parameters.emplace_back(gamma);
            }
            break;
        default:
            throw std::invalid_argument(
                "grid_search: random kernel families are tuned by repeated trials, not CV");
    }

    const std::vector<Fold> folds = stratified_kfold(ds.labels, grid.fold_count, grid.seed);

    auto make_spec = [&](const std::optional<double>& parameter) -> KernelSpec {
        switch (family) {
            case KernelFamily::linear: return Linear{};
            case KernelFamily::polynomial:
                return Polynomial{static_cast<int>(*parameter)};
            default: return Rbf{*parameter};
        }
    };

    // One task per kernel parameter: the Gram matrix does not depend on the
    // trade-off, so it is built once and reused across that whole column.
    std::vector<std::vector<GridPoint>> columns(parameters.size());
    std::vector<char> column_non_converged(parameters.size(), 0);
    parallel_for(workers, parameters.size(), [&](std::size_t p) {
        const Matrix full_gram = gram(make_spec(parameters[p]), ds.features);
        for (double trade_off : grid.trade_off_values) {
            TrainConfig config = base_config;
            config.trade_off = trade_off;
            const CvResult cv = cross_validate_on_gram(full_gram, ds, config, folds);
            columns[p].push_back({trade_off, parameters[p], cv.mean_accuracy});
            if (cv.any_non_converged) column_non_converged[p] = 1;
        }
    });

    GridSearchResult result;
    for (std::size_t p = 0; p < columns.size(); ++p) {
        result.any_non_converged = result.any_non_converged || column_non_converged[p];
        for (const GridPoint& point : columns[p]) result.table.push_back(point);
    }

    auto better = [](const GridPoint& a, const GridPoint& b) {
        if (a.mean_accuracy != b.mean_accuracy) return a.mean_accuracy > b.mean_accuracy;
        if (a.trade_off != b.trade_off) return a.trade_off < b.trade_off;
        return a.kernel_parameter.value_or(0.0) < b.kernel_parameter.value_or(0.0);
    };
    result.best = result.table.front();
    for (const GridPoint& point : result.table)
        if (better(point, result.best)) result.best = point;
    result.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

void TrialPlan::validate(std::size_t band_count) const {
    if (repeats < 1) throw std::invalid_argument("trial plan: repeats must be >= 1");
    if (cluster_counts.empty())
        throw std::invalid_argument("trial plan: cluster_counts must be non-empty");
    for (int k : cluster_counts)
        if (k < 1 || static_cast<std::size_t>(k) > band_count)
            throw std::invalid_argument("trial plan: cluster counts must be in [1, band_count]");
    sampler.validate();
}

std::size_t CrrbfTrialTable::completed_repeats(std::size_t k_index) const {
    std::size_t n = 0;
    for (char done : completed[k_index])
        if (done) ++n;
    return n;
}

TrialStats CrrbfTrialTable::accuracy_stats(std::size_t k_index, std::size_t c_index,
                                           StdConvention convention) const {
    std::vector<double> values;
    for (std::size_t r = 0; r < completed[k_index].size(); ++r)
        if (completed[k_index][r]) values.push_back(outcomes[k_index][c_index][r].test_accuracy);
    return trial_stats(values, convention);
}

TrialStats CrrbfTrialTable::kappa_stats(std::size_t k_index, std::size_t c_index,
                                        StdConvention convention) const {
    std::vector<double> values;
    for (std::size_t r = 0; r < completed[k_index].size(); ++r)
        if (completed[k_index][r]) values.push_back(outcomes[k_index][c_index][r].test_kappa);
    return trial_stats(values, convention);
}

double CrrbfTrialTable::cell_seconds(std::size_t k_index, std::size_t c_index) const {
    double s = 0.0;
    for (std::size_t r = 0; r < completed[k_index].size(); ++r)
        if (completed[k_index][r]) s += outcomes[k_index][c_index][r].seconds;
    return s;
}

double CrrbfTrialTable::best_mean_accuracy(std::size_t k_index,
                                           std::size_t* best_c_index) const {
    double best = -1.0;
    std::size_t best_c = 0;
    for (std::size_t c = 0; c < trade_offs.size(); ++c) {
        const double mean = accuracy_stats(k_index, c).mean;
        if (mean > best) {
            best = mean;
            best_c = c;
        }
    }
    if (best_c_index) *best_c_index = best_c;
    return best;
}

double CrrbfTrialTable::mean_best_accuracy(std::size_t k_index) const {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t r = 0; r < completed[k_index].size(); ++r) {
        if (!completed[k_index][r]) continue;
        double best = -1.0;
        for (std::size_t c = 0; c < trade_offs.size(); ++c)
            best = std::max(best, outcomes[k_index][c][r].test_accuracy);
        sum += best;
        ++count;
    }
    return sum / static_cast<double>(count);
}

bool CrrbfTrialTable::any_non_converged() const {
    for (std::size_t k = 0; k < outcomes.size(); ++k)
        for (const auto& per_c : outcomes[k])
            for (std::size_t r = 0; r < per_c.size(); ++r)
                if (completed[k][r] && !per_c[r].converged) return true;
    return false;
}

namespace {

// One random-kernel trial at a fixed training set: cluster the bands, sample
// per-cluster gammas, then train and score one model per trade-off value.
// Shared by the cluster-count sweep and the training-fraction sweep.
struct TrialResult {
    Crrbf kernel;
    std::vector<TrialOutcome> per_trade_off;
};

TrialResult run_single_trial(const LabeledDataset& train, const LabeledDataset& test,
                             int cluster_count, std::uint64_t trial_seed,
                             GammaSampler sampler, std::span<const double> trade_offs,
                             const TrainConfig& base_config) {
    const BandClustering clustering =
        cluster_bands(train, cluster_count, derive_seed(trial_seed, 1));
    sampler.seed = derive_seed(trial_seed, 2);
    const Crrbf kernel = sample_crrbf(clustering, sampler);
    const KernelSpec spec = kernel;

    const Matrix train_gram = gram(spec, train.features);
    const Matrix cross = gram(spec, test.features, train.features);

    std::vector<int> train_rows(train.sample_count());
    std::iota(train_rows.begin(), train_rows.end(), 0);
    std::vector<int> test_rows(test.sample_count());
    std::iota(test_rows.begin(), test_rows.end(), 0);

    TrialResult result;
    result.kernel = kernel;
    for (double trade_off : trade_offs) {
        const auto start = std::chrono::steady_clock::now();
        TrainConfig config = base_config;
        config.trade_off = trade_off;
        const GramOvoModel model =
            train_ovo_on_gram(train_gram, train_rows, train.labels, train.class_count, config);
        const std::vector<int> predictions = predict_on_gram(model, cross, test_rows);
        const ConfusionMatrix cm = confusion(test.labels, predictions, test.class_count);

        TrialOutcome outcome;
        outcome.test_accuracy = overall_accuracy(cm);
        outcome.test_kappa = cohen_kappa(cm);
        outcome.converged = !model.any_non_converged;
        outcome.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.per_trade_off.push_back(outcome);
    }
    return result;
}

}  // namespace

CrrbfTrialTable run_crrbf_trials(const LabeledDataset& ds_train, const LabeledDataset& ds_test,
                                 const TrialPlan& plan, std::span<const double> trade_offs,
                                 const TrainConfig& base_config, int workers,
                                 const std::atomic<bool>* cancel) {
    ds_train.validate();
    ds_test.validate();
    if (ds_train.band_count() != ds_test.band_count())
        throw std::invalid_argument("run_crrbf_trials: train/test band counts differ");
    plan.validate(ds_train.band_count());
    if (trade_offs.empty())
        throw std::invalid_argument("run_crrbf_trials: trade_offs must be non-empty");

    CrrbfTrialTable table;
    table.cluster_counts = plan.cluster_counts;
    table.trade_offs.assign(trade_offs.begin(), trade_offs.end());
    table.outcomes.assign(
        plan.cluster_counts.size(),
        std::vector<std::vector<TrialOutcome>>(trade_offs.size(),
                                               std::vector<TrialOutcome>(plan.repeats)));
    table.kernels.assign(plan.cluster_counts.size(), std::vector<Crrbf>(plan.repeats));
    table.completed.assign(plan.cluster_counts.size(), std::vector<char>(plan.repeats, 0));

    const std::size_t task_count =
        table.cluster_counts.size() * static_cast<std::size_t>(plan.repeats);
    const auto run_task = [&](std::size_t task) {
        if (cancel && cancel->load(std::memory_order_relaxed)) return;
        const std::size_t k_index = task / plan.repeats;
        const std::size_t repeat = task % plan.repeats;
        const int cluster_count = plan.cluster_counts[k_index];
        const std::uint64_t trial_seed =
            derive_seed(plan.base_seed, static_cast<std::uint64_t>(cluster_count), repeat);

        const TrialResult result = run_single_trial(ds_train, ds_test, cluster_count, trial_seed,
                                                    plan.sampler, trade_offs, base_config);
        table.kernels[k_index][repeat] = result.kernel;
        for (std::size_t c = 0; c < trade_offs.size(); ++c)
            table.outcomes[k_index][c][repeat] = result.per_trade_off[c];
        table.completed[k_index][repeat] = 1;
    };

    TimingRecord timing;
    stopwatch(timing, "crrbf_trials", [&] { parallel_for(workers, task_count, run_task); });
    table.timing = std::move(timing);
    return table;
}

std::size_t FractionSweepRow::completed_repeats() const {
    std::size_t n = 0;
    for (char done : completed)
        if (done) ++n;
    return n;
}

TrialStats FractionSweepRow::accuracy_stats(StdConvention convention) const {
    std::vector<double> values;
    for (std::size_t r = 0; r < outcomes.size(); ++r)
        if (completed[r]) values.push_back(outcomes[r].test_accuracy);
    return trial_stats(values, convention);
}

TrialStats FractionSweepRow::kappa_stats(StdConvention convention) const {
    std::vector<double> values;
    for (std::size_t r = 0; r < outcomes.size(); ++r)
        if (completed[r]) values.push_back(outcomes[r].test_kappa);
    return trial_stats(values, convention);
}

double FractionSweepRow::total_seconds() const {
    double s = 0.0;
    for (std::size_t r = 0; r < outcomes.size(); ++r)
        if (completed[r]) s += outcomes[r].seconds;
    return s;
}

std::vector<FractionSweepRow> training_fraction_sweep(
    const LabeledDataset& ds_train, const LabeledDataset& ds_test,
    std::span<const double> fractions, int cluster_count, double trade_off, int repeats,
    const GammaSampler& sampler, std::uint64_t base_seed, const TrainConfig& base_config,
    int workers, const std::atomic<bool>* cancel) {
    ds_train.validate();
    ds_test.validate();
    if (fractions.empty())
        throw std::invalid_argument("training_fraction_sweep: fractions must be non-empty");
    for (double f : fractions)
        if (!(f > 0.0 && f <= 1.0))
            throw std::invalid_argument("training_fraction_sweep: fractions must be in (0, 1]");
    if (repeats < 1) throw std::invalid_argument("training_fraction_sweep: repeats must be >= 1");

    std::vector<FractionSweepRow> rows(fractions.size());
    for (std::size_t f = 0; f < fractions.size(); ++f) {
        rows[f].fraction = fractions[f];
        rows[f].outcomes.resize(repeats);
        rows[f].kernels.resize(repeats);
        rows[f].completed.assign(repeats, 0);
    }

    const std::vector<double> single_trade_off{trade_off};
    const std::size_t task_count = fractions.size() * static_cast<std::size_t>(repeats);
    parallel_for(workers, task_count, [&](std::size_t task) {
        if (cancel && cancel->load(std::memory_order_relaxed)) return;
        const std::size_t f_index = task / repeats;
        const std::size_t repeat = task % repeats;

        // Same per-repeat seeds as run_crrbf_trials, so the fraction 1.0
        // column reproduces that table cell for cell.
        const std::uint64_t trial_seed =
            derive_seed(base_seed, static_cast<std::uint64_t>(cluster_count), repeat);
        const LabeledDataset subsampled =
            stratified_subsample(ds_train, fractions[f_index], derive_seed(trial_seed, 3));

        const TrialResult result = run_single_trial(subsampled, ds_test, cluster_count,
                                                    trial_seed, sampler, single_trade_off,
                                                    base_config);
        rows[f_index].outcomes[repeat] = result.per_trade_off.front();
        rows[f_index].kernels[repeat] = result.kernel;
        rows[f_index].completed[repeat] = 1;
    });
    return rows;
}

}  // namespace crrbf
