#include "crrbf/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace crrbf {

ConfusionMatrix::ConfusionMatrix(int class_count)
    : class_count_(class_count),
      counts_(static_cast<std::size_t>(class_count) * class_count, 0) {
    if (class_count < 1)
        throw std::invalid_argument("confusion matrix: class_count must be >= 1");
}

long long ConfusionMatrix::total() const {
    long long s = 0;
    for (long long v : counts_) s += v;
    return s;
}

long long ConfusionMatrix::trace() const {
    long long s = 0;
    for (int c = 0; c < class_count_; ++c) s += at(c, c);
    return s;
}

long long& ConfusionMatrix::at(int truth, int predicted) {
    return counts_[static_cast<std::size_t>(truth) * class_count_ + predicted];
}

long long ConfusionMatrix::at(int truth, int predicted) const {
    return counts_[static_cast<std::size_t>(truth) * class_count_ + predicted];
}

std::vector<long long> ConfusionMatrix::row_sums() const {
    std::vector<long long> sums(class_count_, 0);
    for (int r = 0; r < class_count_; ++r)
        for (int c = 0; c < class_count_; ++c) sums[r] += at(r, c);
    return sums;
}

std::vector<long long> ConfusionMatrix::col_sums() const {
    std::vector<long long> sums(class_count_, 0);
    for (int r = 0; r < class_count_; ++r)
        for (int c = 0; c < class_count_; ++c) sums[c] += at(r, c);
    return sums;
}

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted,
                          int class_count) {
    if (truth.size() != predicted.size())
        throw std::invalid_argument("confusion: label vectors have different lengths");
    ConfusionMatrix cm(class_count);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= class_count || predicted[i] < 0 ||
            predicted[i] >= class_count)
            throw std::invalid_argument("confusion: label outside [0, class_count)");
        ++cm.at(truth[i], predicted[i]);
    }
    return cm;
}

double overall_accuracy(const ConfusionMatrix& cm) {
    const long long total = cm.total();
    if (total == 0) throw std::invalid_argument("overall_accuracy: empty confusion matrix");
    return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

double cohen_kappa(const ConfusionMatrix& cm) {
    const long long total = cm.total();
    if (total == 0) throw std::invalid_argument("cohen_kappa: empty confusion matrix");
    const double n = static_cast<double>(total);
    const double p_observed = static_cast<double>(cm.trace()) / n;
    const auto rows = cm.row_sums();
    const auto cols = cm.col_sums();
    double p_expected = 0.0;
    for (int c = 0; c < cm.class_count(); ++c)
        p_expected += static_cast<double>(rows[c]) * static_cast<double>(cols[c]) / (n * n);
    if (p_expected >= 1.0) return p_observed >= 1.0 ? 1.0 : 0.0;
    return (p_observed - p_expected) / (1.0 - p_expected);
}

std::vector<std::optional<double>> per_class_accuracy(const ConfusionMatrix& cm) {
    const auto rows = cm.row_sums();
    std::vector<std::optional<double>> acc(cm.class_count());
    for (int c = 0; c < cm.class_count(); ++c) {
        if (rows[c] > 0)
            acc[c] = static_cast<double>(cm.at(c, c)) / static_cast<double>(rows[c]);
    }
    return acc;
}

TrialStats trial_stats(std::span<const double> values, StdConvention convention) {
    if (values.empty()) throw std::invalid_argument("trial_stats: no values");
    TrialStats stats;
    double sum = 0.0;
    for (double v : values) sum += v;
    stats.mean = sum / static_cast<double>(values.size());
    if (values.size() == 1) {
        stats.degenerate = true;
        return stats;
    }
    double sq = 0.0;
    for (double v : values) {
        const double dev = v - stats.mean;
        sq += dev * dev;
    }
    const double denom = convention == StdConvention::sample
                             ? static_cast<double>(values.size() - 1)
                             : static_cast<double>(values.size());
    stats.stddev = std::sqrt(sq / denom);
    return stats;
}

}  // namespace crrbf
