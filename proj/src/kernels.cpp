#include "crrbf/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "crrbf/rng.hpp"

namespace crrbf {

namespace {

void check_lengths(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("kernel: input vectors have different lengths");
}

void check_positive_gammas(std::span<const double> gammas) {
    for (double g : gammas)
        if (!(g > 0.0) || !std::isfinite(g))
            throw std::invalid_argument("kernel: gammas must be positive and finite");
}

double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

// Shared RBF-family core: exp(-sum_i gamma(i) * (x_i - y_i)^2), accumulated
// in band order.
template <typename GammaAt>
double rbf_core(std::span<const double> x, std::span<const double> y, GammaAt gamma_at) {
    double exponent = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double diff = x[i] - y[i];
        exponent += gamma_at(i) * diff * diff;
    }
    return std::exp(-exponent);
}

double poly_core(std::span<const double> x, std::span<const double> y, int degree) {
    const double base = dot(x, y) + 1.0;
    double v = base;
    for (int p = 1; p < degree; ++p) v *= base;
    return v;
}

// Per-band gamma lookup for a CRRBF spec, hoisted out of pair loops.
std::vector<double> band_gammas(const BandClustering& clustering,
                                std::span<const double> gammas) {
    std::vector<double> expanded(clustering.assignments.size());
    for (std::size_t i = 0; i < expanded.size(); ++i)
        expanded[i] = gammas[clustering.assignments[i]];
    return expanded;
}

template <typename T>
constexpr bool always_false = false;

}  // namespace

const char* family_name(const KernelSpec& spec) {
    return std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Linear>) return "linear";
            else if constexpr (std::is_same_v<T, Polynomial>) return "polynomial";
            else if constexpr (std::is_same_v<T, Rbf>) return "rbf";
            else if constexpr (std::is_same_v<T, Rrbf>) return "rrbf";
            else if constexpr (std::is_same_v<T, Crrbf>) return "crrbf";
            else static_assert(always_false<T>);
        },
        spec);
}

void validate_kernel(const KernelSpec& spec, std::size_t band_count) {
    std::visit(
        [band_count](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Polynomial>) {
                if (s.degree < 1)
                    throw std::invalid_argument("polynomial kernel: degree must be >= 1");
            } else if constexpr (std::is_same_v<T, Rbf>) {
                check_positive_gammas({&s.gamma, 1});
            } else if constexpr (std::is_same_v<T, Rrbf>) {
                check_positive_gammas(s.gammas);
                if (s.gammas.size() != band_count)
                    throw std::invalid_argument("rrbf kernel: gamma count must equal band count");
            } else if constexpr (std::is_same_v<T, Crrbf>) {
                s.clustering.validate();
                check_positive_gammas(s.gammas);
                if (s.clustering.band_count() != band_count)
                    throw std::invalid_argument("crrbf kernel: clustering does not cover the bands");
                if (s.gammas.size() != static_cast<std::size_t>(s.clustering.cluster_count))
                    throw std::invalid_argument("crrbf kernel: gamma count must equal cluster count");
            }
        },
        spec);
}

double eval_linear(std::span<const double> x, std::span<const double> y) {
    check_lengths(x, y);
    return dot(x, y);
}

double eval_polynomial(std::span<const double> x, std::span<const double> y, int degree) {
    check_lengths(x, y);
    if (degree < 1) throw std::invalid_argument("polynomial kernel: degree must be >= 1");
    return poly_core(x, y, degree);
}

double eval_rbf(std::span<const double> x, std::span<const double> y, double gamma) {
    check_lengths(x, y);
    check_positive_gammas({&gamma, 1});
    return rbf_core(x, y, [gamma](std::size_t) { return gamma; });
}

double eval_rrbf(std::span<const double> x, std::span<const double> y,
                 std::span<const double> gammas) {
    check_lengths(x, y);
    if (gammas.size() != x.size())
        throw std::invalid_argument("rrbf kernel: gamma count must equal band count");
    check_positive_gammas(gammas);
    return rbf_core(x, y, [gammas](std::size_t i) { return gammas[i]; });
}

double eval_crrbf(std::span<const double> x, std::span<const double> y,
                  const BandClustering& clustering, std::span<const double> gammas) {
    check_lengths(x, y);
    clustering.validate();
    if (clustering.band_count() != x.size())
        throw std::invalid_argument("crrbf kernel: clustering does not cover the bands");
    if (gammas.size() != static_cast<std::size_t>(clustering.cluster_count))
        throw std::invalid_argument("crrbf kernel: gamma count must equal cluster count");
    check_positive_gammas(gammas);
    const std::vector<double> expanded = band_gammas(clustering, gammas);
    return rbf_core(x, y, [&expanded](std::size_t i) { return expanded[i]; });
}

double eval_kernel(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> y) {
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Linear>) return eval_linear(x, y);
            else if constexpr (std::is_same_v<T, Polynomial>) return eval_polynomial(x, y, s.degree);
            else if constexpr (std::is_same_v<T, Rbf>) return eval_rbf(x, y, s.gamma);
            else if constexpr (std::is_same_v<T, Rrbf>) return eval_rrbf(x, y, s.gammas);
            else if constexpr (std::is_same_v<T, Crrbf>)
                return eval_crrbf(x, y, s.clustering, s.gammas);
            else static_assert(always_false<T>);
        },
        spec);
}

void GammaSampler::validate() const {
    if (!(low >= 0.0) || !(low < high) || !std::isfinite(high))
        throw std::invalid_argument("gamma sampler: need 0 <= low < high < inf");
}

Rrbf sample_rrbf(std::size_t band_count, const GammaSampler& sampler) {
    sampler.validate();
    if (band_count < 1) throw std::invalid_argument("sample_rrbf: band_count must be >= 1");
    Rng rng(sampler.seed);
    Rrbf kernel;
    kernel.gammas.resize(band_count);
    for (double& g : kernel.gammas) g = rng.uniform_in(sampler.low, sampler.high);
    return kernel;
}

Crrbf sample_crrbf(const BandClustering& clustering, const GammaSampler& sampler) {
    sampler.validate();
    clustering.validate();
    Rng rng(sampler.seed);
    Crrbf kernel;
    kernel.clustering = clustering;
    kernel.gammas.resize(clustering.cluster_count);
    for (double& g : kernel.gammas) g = rng.uniform_in(sampler.low, sampler.high);
    return kernel;
}

namespace {

template <typename PairEval>
Matrix fill_symmetric(const Matrix& samples, PairEval eval) {
    const std::size_t n = samples.rows();
    Matrix k(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        k(i, i) = eval(samples.row(i), samples.row(i));
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = eval(samples.row(i), samples.row(j));
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

template <typename PairEval>
Matrix fill_cross(const Matrix& a, const Matrix& b, PairEval eval) {
    Matrix k(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.rows(); ++j) k(i, j) = eval(a.row(i), b.row(j));
    return k;
}

// Dispatches once per Gram matrix so pair loops run without validation or
// variant overhead.
template <typename Fill>
Matrix build_gram(const KernelSpec& spec, std::size_t band_count, Fill fill) {
    validate_kernel(spec, band_count);
    return std::visit(
        [&](const auto& s) -> Matrix {
            using T = std::decay_t<decltype(s)>;
            using V = std::span<const double>;
            if constexpr (std::is_same_v<T, Linear>) {
                return fill([](V x, V y) { return dot(x, y); });
            } else if constexpr (std::is_same_v<T, Polynomial>) {
                return fill([degree = s.degree](V x, V y) { return poly_core(x, y, degree); });
            } else if constexpr (std::is_same_v<T, Rbf>) {
                return fill([gamma = s.gamma](V x, V y) {
                    return rbf_core(x, y, [gamma](std::size_t) { return gamma; });
                });
            } else if constexpr (std::is_same_v<T, Rrbf>) {
                return fill([&gammas = s.gammas](V x, V y) {
                    return rbf_core(x, y, [&gammas](std::size_t i) { return gammas[i]; });
                });
            } else if constexpr (std::is_same_v<T, Crrbf>) {
                return fill([expanded = band_gammas(s.clustering, s.gammas)](V x, V y) {
                    return rbf_core(x, y, [&expanded](std::size_t i) { return expanded[i]; });
                });
            } else {
                static_assert(always_false<T>);
            }
        },
        spec);
}

}  // namespace

Matrix gram(const KernelSpec& spec, const Matrix& samples) {
    return build_gram(spec, samples.cols(),
                      [&](auto eval) { return fill_symmetric(samples, eval); });
}

Matrix gram(const KernelSpec& spec, const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols())
        throw std::invalid_argument("gram: sample matrices have different band counts");
    return build_gram(spec, a.cols(), [&](auto eval) { return fill_cross(a, b, eval); });
}

nlohmann::json kernel_to_json(const KernelSpec& spec) {
    nlohmann::json j;
    j["family"] = family_name(spec);
    std::visit(
        [&j](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Polynomial>) {
                j["degree"] = s.degree;
            } else if constexpr (std::is_same_v<T, Rbf>) {
                j["gamma"] = s.gamma;
            } else if constexpr (std::is_same_v<T, Rrbf>) {
                j["gammas"] = s.gammas;
            } else if constexpr (std::is_same_v<T, Crrbf>) {
                j["gammas"] = s.gammas;
                j["cluster_count"] = s.clustering.cluster_count;
                j["assignments"] = s.clustering.assignments;
            }
        },
        spec);
    return j;
}

KernelSpec kernel_from_json(const nlohmann::json& j) {
    const std::string family = j.at("family").get<std::string>();
    if (family == "linear") return Linear{};
    if (family == "polynomial") return Polynomial{j.at("degree").get<int>()};
    if (family == "rbf") return Rbf{j.at("gamma").get<double>()};
    if (family == "rrbf") return Rrbf{j.at("gammas").get<std::vector<double>>()};
    if (family == "crrbf") {
        Crrbf kernel;
        kernel.gammas = j.at("gammas").get<std::vector<double>>();
        kernel.clustering.cluster_count = j.at("cluster_count").get<int>();
        kernel.clustering.assignments = j.at("assignments").get<std::vector<int>>();
        kernel.clustering.validate();
        return kernel;
    }
    throw std::invalid_argument("unknown kernel family '" + family + "'");
}

}  // namespace crrbf
