#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "crrbf/band_clustering.hpp"
#include "crrbf/matrix.hpp"

namespace crrbf {

// The five kernel families. All RBF-family evaluations accumulate the
// exponent band by band with the same loop, so the reduction identities
// (one cluster -> plain RBF, singleton clusters -> per-band random RBF,
// constant per-band gammas -> plain RBF) hold bit for bit.
struct Linear {};
struct Polynomial {
    int degree = 2;
};
struct Rbf {
    double gamma = 1.0;
};
struct Rrbf {
    std::vector<double> gammas;  // one per band
};
struct Crrbf {
    BandClustering clustering;
    std::vector<double> gammas;  // one per cluster
};

using KernelSpec = std::variant<Linear, Polynomial, Rbf, Rrbf, Crrbf>;

const char* family_name(const KernelSpec& spec);

// Throws std::invalid_argument if the spec is internally inconsistent or
// does not fit data with the given band count.
void validate_kernel(const KernelSpec& spec, std::size_t band_count);

double eval_linear(std::span<const double> x, std::span<const double> y);
double eval_polynomial(std::span<const double> x, std::span<const double> y, int degree);
double eval_rbf(std::span<const double> x, std::span<const double> y, double gamma);
double eval_rrbf(std::span<const double> x, std::span<const double> y,
                 std::span<const double> gammas);
double eval_crrbf(std::span<const double> x, std::span<const double> y,
                  const BandClustering& clustering, std::span<const double> gammas);
double eval_kernel(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> y);

// Uniform draws on (low, high]; strictly positive whenever low >= 0.
struct GammaSampler {
    double low = 0.0;
    double high = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

Rrbf sample_rrbf(std::size_t band_count, const GammaSampler& sampler);
Crrbf sample_crrbf(const BandClustering& clustering, const GammaSampler& sampler);

// Symmetric Gram matrix: each unordered pair is evaluated once and mirrored.
Matrix gram(const KernelSpec& spec, const Matrix& samples);
// Cross Gram matrix, entry (i, j) = K(a_i, b_j).
Matrix gram(const KernelSpec& spec, const Matrix& a, const Matrix& b);

nlohmann::json kernel_to_json(const KernelSpec& spec);
KernelSpec kernel_from_json(const nlohmann::json& j);

}  // namespace crrbf
