#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace crrbf {

// C x C counts, entry (truth, predicted).
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int class_count);

    int class_count() const { return class_count_; }
    long long total() const;
    long long trace() const;
    long long& at(int truth, int predicted);
    long long at(int truth, int predicted) const;
    std::vector<long long> row_sums() const;
    std::vector<long long> col_sums() const;

private:
    int class_count_;
    std::vector<long long> counts_;
};

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted,
                          int class_count);

// trace / total, in [0, 1].
double overall_accuracy(const ConfusionMatrix& cm);

// (p_o - p_e) / (1 - p_e); the degenerate p_e = 1 case returns 1 when the
// observed agreement is also perfect, 0 otherwise.
double cohen_kappa(const ConfusionMatrix& cm);

// diagonal / row sum; classes with no samples report nullopt, never 0 or 1.
std::vector<std::optional<double>> per_class_accuracy(const ConfusionMatrix& cm);

enum class StdConvention { sample, population };

struct TrialStats {
    double mean = 0.0;
    double stddev = 0.0;
    bool degenerate = false;  // fewer than two values; stddev is 0 by convention
};

TrialStats trial_stats(std::span<const double> values,
                       StdConvention convention = StdConvention::sample);

struct TimingEntry {
    std::string stage;
    double seconds = 0.0;  // wall clock, millisecond resolution
};

struct TimingRecord {
    std::vector<TimingEntry> entries;

    void add(std::string stage, double seconds) {
        entries.push_back({std::move(stage), std::round(seconds * 1000.0) / 1000.0});
    }
    double total() const {
        double s = 0.0;
        for (const auto& e : entries) s += e.seconds;
        return s;
    }
};

// Runs the computation, appends a monotonic-clock entry and passes the result
// through.
template <typename F>
auto stopwatch(TimingRecord& record, std::string stage, F&& computation) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<std::invoke_result_t<F>>) {
        computation();
        record.add(std::move(stage), std::chrono::duration<double>(
                                         std::chrono::steady_clock::now() - start)
                                         .count());
    } else {
        auto result = computation();
        record.add(std::move(stage), std::chrono::duration<double>(
                                         std::chrono::steady_clock::now() - start)
                                         .count());
        return result;
    }
}

}  // namespace crrbf
