#pragma once

#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "crrbf/dataset.hpp"
#include "crrbf/kernels.hpp"
#include "crrbf/matrix.hpp"

namespace crrbf {

struct TrainConfig {
    double trade_off = 1.0;  // soft-margin C
    double kkt_tolerance = 1e-3;
    int max_passes_without_progress = 10;
    long max_iterations = 100000;

    void validate() const;
};

// Soft-margin binary SVM in dual form. Zero coefficients are dropped;
// support_indices point into the training order handed to train_binary.
struct BinarySvmModel {
    std::vector<int> support_indices;
    std::vector<double> alphas;
    std::vector<double> signed_labels;  // +-1 at the support indices
    double bias = 0.0;
    bool converged = true;
    double kkt_violation = 0.0;  // max-pair violation at exit
    long iterations = 0;
    double dual_objective = 0.0;
};

// SMO on a precomputed Gram matrix. Working pairs are picked by maximal KKT
// violation; when the paired step stalls numerically, a seeded random second
// choice is tried before giving up. Hitting the iteration cap or stalling
// returns a model flagged converged = false rather than throwing.
BinarySvmModel train_binary(const Matrix& gram, std::span<const double> signed_labels,
                            const TrainConfig& config);

// f(x) = sum_i alpha_i y_i K(x, x_i) + b; cross_gram columns must align with
// support_indices.
std::vector<double> decision_values(const BinarySvmModel& model, const Matrix& cross_gram);

struct PairwiseModel {
    int class_a = 0;  // votes +1
    int class_b = 0;  // votes -1
    std::vector<int> support;  // rows of MulticlassSvmModel::support_samples
    std::vector<double> alphas;
    std::vector<double> signed_labels;
    double bias = 0.0;
    bool converged = true;
};

// One-vs-one ensemble: C(C-1)/2 pairwise models over a shared Gram matrix,
// majority voting with margin-sum then smallest-id tie-breaks.
struct MulticlassSvmModel {
    int class_count = 0;
    KernelSpec kernel;
    Matrix support_samples;  // union of all pairwise support vectors
    std::vector<PairwiseModel> pairs;
    std::vector<long long> original_ids;

    bool fully_converged() const;
};

MulticlassSvmModel train_ovo(const LabeledDataset& ds, const KernelSpec& spec,
                             const TrainConfig& config);

std::vector<int> predict(const MulticlassSvmModel& model, const Matrix& samples);

// Voting rule used by predict, exposed for direct testing: one decision value
// per (a, b) pair, positive meaning a vote for class a.
int ovo_vote(std::span<const std::pair<int, int>> class_pairs,
             std::span<const double> decisions, int class_count);

nlohmann::json model_to_json(const MulticlassSvmModel& model);
MulticlassSvmModel model_from_json(const nlohmann::json& j);

}  // namespace crrbf
