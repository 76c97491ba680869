#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "crrbf/matrix.hpp"

namespace crrbf {

// N samples of d spectral bands with dense class labels in [0, class_count).
// original_ids maps each dense label back to the value found in the source
// file (for synthetic data that map is the identity).
struct LabeledDataset {
    Matrix features;
    std::vector<int> labels;
    int class_count = 0;
    std::vector<long long> original_ids;

    std::size_t sample_count() const { return features.rows(); }
    std::size_t band_count() const { return features.cols(); }
    std::vector<int> class_sizes() const;
    std::vector<std::vector<int>> indices_by_class() const;

    // Throws ValidationError if any dataset invariant is broken.
    void validate() const;
};

// Desk-scale stand-in for real hyperspectral exports: class mean spectra are
// AR(1) processes over the band index, so adjacent bands carry similar
// information, and per-sample noise follows the same AR(1) structure.
struct SyntheticSpec {
    int class_count = 2;
    int samples_per_class = 50;
    int band_count = 10;
    double spectral_smoothness = 0.9;  // AR(1) coefficient, in [0, 1)
    double class_separation = 3.0;     // scale of class mean spectra
    double noise_std = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

// CSV contract: one sample per line, d numeric fields then one integer label,
// '.' decimal separator, no header, LF or CRLF endings.
LabeledDataset load_dataset(const std::filesystem::path& path);

// Draws max(1, round-half-up(fraction * n_c)) samples per class without
// replacement. Selected rows keep their original order, so fraction = 1.0
// returns an identical copy.
LabeledDataset stratified_subsample(const LabeledDataset& ds, double fraction,
                                    std::uint64_t seed);

LabeledDataset generate_synthetic(const SyntheticSpec& spec);

// Train and test sets sharing the same class mean spectra: the train set has
// spec.samples_per_class samples per class, the test set test_samples_per_class.
std::pair<LabeledDataset, LabeledDataset> generate_synthetic_pair(const SyntheticSpec& spec,
                                                                  int test_samples_per_class);

// Per-band affine transform fitted on training data; apply() reproduces the
// standardized training features bit for bit.
struct Standardization {
    std::vector<double> means;
    std::vector<double> scales;  // per-band sample std; 1 for near-constant bands

    Matrix apply(const Matrix& features) const;
    Matrix invert(const Matrix& features) const;
};

// Zero-mean unit-std per band (n-1 denominator); bands with std below 1e-12
// are centered and left at scale 1.
std::pair<LabeledDataset, Standardization> standardize(const LabeledDataset& ds);

}  // namespace crrbf
