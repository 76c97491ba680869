#include "crrbf/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "crrbf/rng.hpp"

namespace crrbf {

void TrainConfig::validate() const {
    if (!(trade_off > 0.0) || !std::isfinite(trade_off))
        throw std::invalid_argument("train config: trade_off must be positive and finite");
    if (!(kkt_tolerance > 0.0))
        throw std::invalid_argument("train config: kkt_tolerance must be > 0");
    if (max_passes_without_progress < 1)
        throw std::invalid_argument("train config: max_passes_without_progress must be >= 1");
    if (max_iterations < 1)
        throw std::invalid_argument("train config: max_iterations must be >= 1");
}

namespace {

// Dual problem in LIBSVM form: minimize 1/2 a'Qa - e'a with Q_ij = y_i y_j K_ij
// subject to y'a = 0 and 0 <= a <= C. gradient_ holds Qa - e. -y_i g_i for
// i free lies in [M, m] at optimality, so the maximal violating pair
// criterion m - M <= tolerance bounds every per-sample KKT violation.
class SmoSolver {
public:
    SmoSolver(const Matrix& gram, std::span<const double> labels, const TrainConfig& config)
        : gram_(gram), labels_(labels), config_(config), n_(labels.size()),
          alpha_(n_, 0.0), gradient_(n_, -1.0), rng_(0x5b3f8a11c0ffee01ULL) {}

    BinarySvmModel solve() {
        long iterations = 0;
        int stalled = 0;
        bool converged = false;
        double violation = std::numeric_limits<double>::infinity();

        while (iterations < config_.max_iterations) {
            ++iterations;
            const auto [i, j, m, big_m] = select_pair();
            violation = m - big_m;
            if (violation <= config_.kkt_tolerance) {
                converged = true;
                break;
            }
            bool moved = take_step(i, j);
            if (!moved) moved = random_fallback(i);
            if (moved) {
                stalled = 0;
            } else if (++stalled >= config_.max_passes_without_progress) {
                break;  // numerically stuck above tolerance
            }
        }
        if (!converged) {
            const auto [i, j, m, big_m] = select_pair();
            (void)i;
            (void)j;
            violation = m - big_m;
            converged = violation <= config_.kkt_tolerance;
        }

        BinarySvmModel model;
        model.converged = converged;
        model.kkt_violation = std::max(violation, 0.0);
        model.iterations = iterations;
        model.bias = compute_bias();
        double alpha_dot_grad = 0.0;
        double alpha_sum = 0.0;
        for (std::size_t t = 0; t < n_; ++t) {
            alpha_dot_grad += alpha_[t] * gradient_[t];
            alpha_sum += alpha_[t];
        }
        model.dual_objective = 0.5 * (alpha_sum - alpha_dot_grad);
        for (std::size_t t = 0; t < n_; ++t) {
            if (alpha_[t] > 0.0) {
                model.support_indices.push_back(static_cast<int>(t));
                model.alphas.push_back(alpha_[t]);
                model.signed_labels.push_back(labels_[t]);
            }
        }
        return model;
    }

private:
    struct Pair {
        std::size_t i;
        std::size_t j;
        double m;      // max over the up set of -y g
        double big_m;  // min over the down set of -y g
    };

    bool in_up_set(std::size_t t) const {
        return labels_[t] > 0 ? alpha_[t] < config_.trade_off : alpha_[t] > 0.0;
    }
    bool in_down_set(std::size_t t) const {
        return labels_[t] > 0 ? alpha_[t] > 0.0 : alpha_[t] < config_.trade_off;
    }

    Pair select_pair() const {
        Pair p{0, 0, -std::numeric_limits<double>::infinity(),
               std::numeric_limits<double>::infinity()};
        for (std::size_t t = 0; t < n_; ++t) {
            const double v = -labels_[t] * gradient_[t];
            if (in_up_set(t) && v > p.m) {
                p.m = v;
                p.i = t;
            }
            if (in_down_set(t) && v < p.big_m) {
                p.big_m = v;
                p.j = t;
            }
        }
        return p;
    }

    // Optimizes the pair (i, j) along the feasible direction d_i = y_i,
    // d_j = -y_j. Returns false when no meaningful step was possible.
    bool take_step(std::size_t i, std::size_t j) {
        if (i == j) return false;
        const double c = config_.trade_off;
        const double yi = labels_[i];
        const double yj = labels_[j];

        const double gain = (-yi * gradient_[i]) - (-yj * gradient_[j]);
        if (gain <= 0.0) return false;

        const double cap_i = yi > 0 ? c - alpha_[i] : alpha_[i];
        const double cap_j = yj > 0 ? alpha_[j] : c - alpha_[j];
        const double t_max = std::min(cap_i, cap_j);
        if (t_max <= 0.0) return false;

        const double eta =
            std::max(gram_(i, i) + gram_(j, j) - 2.0 * gram_(i, j), 1e-12);
        const double t = std::min(gain / eta, t_max);
        if (t < 1e-14 * std::max(1.0, c)) return false;

        const double old_i = alpha_[i];
        const double old_j = alpha_[j];
        alpha_[i] = std::clamp(alpha_[i] + yi * t, 0.0, c);
        alpha_[j] = std::clamp(alpha_[j] - yj * t, 0.0, c);

        const double delta_i = alpha_[i] - old_i;
        const double delta_j = alpha_[j] - old_j;
        for (std::size_t s = 0; s < n_; ++s) {
            gradient_[s] +=
                labels_[s] * (yi * delta_i * gram_(s, i) + yj * delta_j * gram_(s, j));
        }
        return true;
    }

    // Simplified second-choice fallback: keep the most violating first index
    // and try partners in random order.
    bool random_fallback(std::size_t i) {
        std::vector<std::size_t> order(n_);
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng_.shuffle(order);
        for (std::size_t j : order) {
            if (j == i || !in_down_set(j)) continue;
            if (take_step(i, j)) return true;
        }
        return false;
    }

    double compute_bias() const {
        double sum = 0.0;
        std::size_t free_count = 0;
        for (std::size_t t = 0; t < n_; ++t) {
            if (alpha_[t] > 0.0 && alpha_[t] < config_.trade_off) {
                sum += -labels_[t] * gradient_[t];
                ++free_count;
            }
        }
        if (free_count > 0) return sum / static_cast<double>(free_count);
        const auto [i, j, m, big_m] = select_pair();
        (void)i;
        (void)j;
        return 0.5 * (m + big_m);
    }

    const Matrix& gram_;
    std::span<const double> labels_;
    const TrainConfig& config_;
    std::size_t n_;
    std::vector<double> alpha_;
    std::vector<double> gradient_;
    Rng rng_;
};

}  // namespace

BinarySvmModel train_binary(const Matrix& gram, std::span<const double> signed_labels,
                            const TrainConfig& config) {
    config.validate();
    if (gram.rows() != gram.cols()) throw std::invalid_argument("train_binary: gram not square");
    if (signed_labels.size() != gram.rows())
        throw std::invalid_argument("train_binary: label count does not match gram size");
    bool has_pos = false;
    bool has_neg = false;
    for (double y : signed_labels) {
        if (y == 1.0) has_pos = true;
        else if (y == -1.0) has_neg = true;
        else throw std::invalid_argument("train_binary: labels must be exactly +1 or -1");
    }
    if (!has_pos || !has_neg)
        throw std::invalid_argument("train_binary: both classes must be present");

    return SmoSolver(gram, signed_labels, config).solve();
}

std::vector<double> decision_values(const BinarySvmModel& model, const Matrix& cross_gram) {
    if (cross_gram.cols() != model.support_indices.size())
        throw std::invalid_argument(
            "decision_values: cross gram columns must match support count");
    std::vector<double> values(cross_gram.rows());
    for (std::size_t r = 0; r < cross_gram.rows(); ++r) {
        double f = model.bias;
        const auto row = cross_gram.row(r);
        for (std::size_t s = 0; s < row.size(); ++s)
            f += model.alphas[s] * model.signed_labels[s] * row[s];
        values[r] = f;
    }
    return values;
}

bool MulticlassSvmModel::fully_converged() const {
    return std::all_of(pairs.begin(), pairs.end(),
                       [](const PairwiseModel& p) { return p.converged; });
}

MulticlassSvmModel train_ovo(const LabeledDataset& ds, const KernelSpec& spec,
                             const TrainConfig& config) {
    ds.validate();
    validate_kernel(spec, ds.band_count());
    config.validate();

    const Matrix full_gram = gram(spec, ds.features);
    const auto by_class = ds.indices_by_class();

    struct RawPair {
        int class_a, class_b;
        std::vector<int> global_support;
        std::vector<double> alphas, signed_labels;
        double bias;
        bool converged;
    };
    std::vector<RawPair> raw;

    for (int a = 0; a < ds.class_count; ++a) {
        for (int b = a + 1; b < ds.class_count; ++b) {
            std::vector<int> indices;
            indices.reserve(by_class[a].size() + by_class[b].size());
            for (std::size_t t = 0; t < ds.labels.size(); ++t)
                if (ds.labels[t] == a || ds.labels[t] == b)
                    indices.push_back(static_cast<int>(t));

            Matrix sub(indices.size(), indices.size());
            for (std::size_t r = 0; r < indices.size(); ++r)
                for (std::size_t c = 0; c < indices.size(); ++c)
                    sub(r, c) = full_gram(indices[r], indices[c]);

            std::vector<double> labels(indices.size());
            for (std::size_t t = 0; t < indices.size(); ++t)
                labels[t] = ds.labels[indices[t]] == a ? 1.0 : -1.0;

            const BinarySvmModel binary = train_binary(sub, labels, config);
            RawPair p;
            p.class_a = a;
            p.class_b = b;
            for (std::size_t s = 0; s < binary.support_indices.size(); ++s)
                p.global_support.push_back(indices[binary.support_indices[s]]);
            p.alphas = binary.alphas;
            p.signed_labels = binary.signed_labels;
            p.bias = binary.bias;
            p.converged = binary.converged;
            raw.push_back(std::move(p));
        }
    }

    // Retain only the union of support vectors.
    std::vector<int> union_rows;
    {
        std::vector<bool> used(ds.sample_count(), false);
        for (const auto& p : raw)
            for (int g : p.global_support) used[g] = true;
        for (std::size_t t = 0; t < used.size(); ++t)
            if (used[t]) union_rows.push_back(static_cast<int>(t));
    }
    std::vector<int> global_to_compact(ds.sample_count(), -1);
    for (std::size_t t = 0; t < union_rows.size(); ++t)
        global_to_compact[union_rows[t]] = static_cast<int>(t);

    MulticlassSvmModel model;
    model.class_count = ds.class_count;
    model.kernel = spec;
    model.support_samples = ds.features.select_rows(union_rows);
    model.original_ids = ds.original_ids;
    for (auto& p : raw) {
        PairwiseModel out;
        out.class_a = p.class_a;
        out.class_b = p.class_b;
        out.support.reserve(p.global_support.size());
        for (int g : p.global_support) out.support.push_back(global_to_compact[g]);
        out.alphas = std::move(p.alphas);
        out.signed_labels = std::move(p.signed_labels);
        out.bias = p.bias;
        out.converged = p.converged;
        model.pairs.push_back(std::move(out));
    }
    return model;
}

int ovo_vote(std::span<const std::pair<int, int>> class_pairs,
             std::span<const double> decisions, int class_count) {
    if (class_pairs.size() != decisions.size())
        throw std::invalid_argument("ovo_vote: one decision value per pair required");
    std::vector<int> votes(class_count, 0);
    std::vector<double> margin(class_count, 0.0);
    for (std::size_t p = 0; p < class_pairs.size(); ++p) {
        const int winner = decisions[p] > 0.0 ? class_pairs[p].first : class_pairs[p].second;
        ++votes[winner];
        margin[winner] += std::abs(decisions[p]);
    }
    int best = 0;
    for (int c = 1; c < class_count; ++c) {
        if (votes[c] > votes[best] ||
            (votes[c] == votes[best] && margin[c] > margin[best])) {
            best = c;
        }
    }
    return best;
}

std::vector<int> predict(const MulticlassSvmModel& model, const Matrix& samples) {
    if (samples.cols() != model.support_samples.cols())
        throw std::invalid_argument("predict: band count does not match training data");
    const Matrix cross = gram(model.kernel, samples, model.support_samples);

    std::vector<std::pair<int, int>> class_pairs;
    class_pairs.reserve(model.pairs.size());
    for (const auto& p : model.pairs) class_pairs.emplace_back(p.class_a, p.class_b);

    std::vector<int> out(samples.rows());
    std::vector<double> decisions(model.pairs.size());
    for (std::size_t r = 0; r < samples.rows(); ++r) {
        const auto row = cross.row(r);
        for (std::size_t p = 0; p < model.pairs.size(); ++p) {
            const auto& pair = model.pairs[p];
            double f = pair.bias;
            for (std::size_t s = 0; s < pair.support.size(); ++s)
                f += pair.alphas[s] * pair.signed_labels[s] * row[pair.support[s]];
            decisions[p] = f;
        }
        out[r] = ovo_vote(class_pairs, decisions, model.class_count);
    }
    return out;
}

nlohmann::json model_to_json(const MulticlassSvmModel& model) {
    nlohmann::json j;
    j["version"] = 1;
    j["class_count"] = model.class_count;
    j["band_count"] = model.support_samples.cols();
    j["original_ids"] = model.original_ids;
    j["kernel"] = kernel_to_json(model.kernel);
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < model.support_samples.rows(); ++r) {
        const auto row = model.support_samples.row(r);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["support_samples"] = std::move(rows);
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : model.pairs) {
        pairs.push_back({{"class_a", p.class_a},
                         {"class_b", p.class_b},
                         {"support", p.support},
                         {"alphas", p.alphas},
                         {"signed_labels", p.signed_labels},
                         {"bias", p.bias},
                         {"converged", p.converged}});
    }
    j["pairs"] = std::move(pairs);
    return j;
}

MulticlassSvmModel model_from_json(const nlohmann::json& j) {
    if (j.at("version").get<int>() != 1)
        throw std::invalid_argument("model file has an unsupported version");
    MulticlassSvmModel model;
    model.class_count = j.at("class_count").get<int>();
    model.original_ids = j.at("original_ids").get<std::vector<long long>>();
    model.kernel = kernel_from_json(j.at("kernel"));
    const auto& rows = j.at("support_samples");
    const auto band_count = j.at("band_count").get<std::size_t>();
    model.support_samples = Matrix(rows.size(), band_count);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto row = rows[r].get<std::vector<double>>();
        if (row.size() != band_count)
            throw std::invalid_argument("model file: ragged support sample");
        std::copy(row.begin(), row.end(), model.support_samples.row(r).begin());
    }
    for (const auto& p : j.at("pairs")) {
        PairwiseModel out;
        out.class_a = p.at("class_a").get<int>();
        out.class_b = p.at("class_b").get<int>();
        out.support = p.at("support").get<std::vector<int>>();
        out.alphas = p.at("alphas").get<std::vector<double>>();
        out.signed_labels = p.at("signed_labels").get<std::vector<double>>();
        out.bias = p.at("bias").get<double>();
        out.converged = p.at("converged").get<bool>();
        model.pairs.push_back(std::move(out));
    }
    return model;
}

}  // namespace crrbf
