#include "crrbf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <string>

#include "crrbf/errors.hpp"
#include "crrbf/rng.hpp"

namespace crrbf {

std::vector<int> LabeledDataset::class_sizes() const {
    std::vector<int> sizes(class_count, 0);
    for (int label : labels) ++sizes[label];
    return sizes;
}

std::vector<std::vector<int>> LabeledDataset::indices_by_class() const {
    std::vector<std::vector<int>> by_class(class_count);
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[labels[i]].push_back(static_cast<int>(i));
    return by_class;
}

void LabeledDataset::validate() const {
    if (features.rows() < 2) throw ValidationError("dataset needs at least 2 samples");
    if (features.cols() < 1) throw ValidationError("dataset needs at least 1 band");
    if (labels.size() != features.rows())
        throw ValidationError("label count does not match sample count");
    if (class_count < 2) throw ValidationError("dataset needs at least 2 classes");
    for (double v : features.data())
        if (!std::isfinite(v)) throw ValidationError("dataset contains a non-finite value");
    std::vector<bool> seen(class_count, false);
    for (int label : labels) {
        if (label < 0 || label >= class_count)
            throw ValidationError("label outside [0, class_count)");
        seen[label] = true;
    }
    for (int c = 0; c < class_count; ++c)
        if (!seen[c])
            throw ValidationError("class " + std::to_string(c) + " has no samples");
    if (!original_ids.empty() && original_ids.size() != static_cast<std::size_t>(class_count))
        throw ValidationError("original id map size does not match class count");
}

void SyntheticSpec::validate() const {
    if (class_count < 2) throw ValidationError("synthetic spec: class_count must be >= 2");
    if (band_count < 2) throw ValidationError("synthetic spec: band_count must be >= 2");
    if (samples_per_class < 1)
        throw ValidationError("synthetic spec: samples_per_class must be >= 1");
    if (!(spectral_smoothness >= 0.0 && spectral_smoothness < 1.0))
        throw ValidationError("synthetic spec: spectral_smoothness must be in [0, 1)");
    if (!(noise_std > 0.0)) throw ValidationError("synthetic spec: noise_std must be > 0");
    if (!std::isfinite(class_separation))
        throw ValidationError("synthetic spec: class_separation must be finite");
}

namespace {

bool parse_double(const std::string& field, double& out) {
    const char* begin = field.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + field.size() && !field.empty();
}

bool parse_label(const std::string& field, long long& out) {
    const char* begin = field.c_str();
    char* end = nullptr;
    out = std::strtoll(begin, &end, 10);
    return end == begin + field.size() && !field.empty();
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

}  // namespace

LabeledDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open dataset file: " + path.string());

    std::vector<double> values;
    std::vector<long long> raw_labels;
    std::size_t band_count = 0;
    std::size_t line_number = 0;
    std::string line;
    const std::string where = path.filename().string();

    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        const auto fields = split_fields(line);
        if (fields.size() < 2)
            throw ParseError(where + ":" + std::to_string(line_number) +
                             ": expected at least one feature and a label");
        if (band_count == 0) {
            band_count = fields.size() - 1;
        } else if (fields.size() != band_count + 1) {
            throw ParseError(where + ":" + std::to_string(line_number) + ": row has " +
                             std::to_string(fields.size() - 1) + " features, expected " +
                             std::to_string(band_count));
        }
        for (std::size_t j = 0; j < band_count; ++j) {
            double v = 0.0;
            if (!parse_double(fields[j], v))
                throw ParseError(where + ":" + std::to_string(line_number) +
                                 ": non-numeric cell '" + fields[j] + "'");
            values.push_back(v);
        }
        long long label = 0;
        if (!parse_label(fields.back(), label))
            throw ParseError(where + ":" + std::to_string(line_number) +
                             ": non-integer label '" + fields.back() + "'");
        raw_labels.push_back(label);
    }

    if (raw_labels.empty()) throw ParseError(where + ": empty dataset file");

    // Densify labels to 0..C-1 by order of first appearance.
    std::map<long long, int> to_dense;
    std::vector<long long> original_ids;
    std::vector<int> labels;
    labels.reserve(raw_labels.size());
    for (long long raw : raw_labels) {
        auto it = to_dense.find(raw);
        if (it == to_dense.end()) {
            it = to_dense.emplace(raw, static_cast<int>(original_ids.size())).first;
            original_ids.push_back(raw);
        }
        labels.push_back(it->second);
    }

    LabeledDataset ds;
    ds.features = Matrix(raw_labels.size(), band_count);
    ds.features.data() = std::move(values);
    ds.labels = std::move(labels);
    ds.class_count = static_cast<int>(original_ids.size());
    ds.original_ids = std::move(original_ids);
    ds.validate();
    return ds;
}

LabeledDataset stratified_subsample(const LabeledDataset& ds, double fraction,
                                    std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw std::invalid_argument("stratified_subsample: fraction must be in (0, 1]");
    ds.validate();

    std::vector<bool> keep(ds.sample_count(), false);
    Rng rng(seed);
    for (auto& class_indices : ds.indices_by_class()) {
        if (fraction == 1.0) {
            for (int i : class_indices) keep[i] = true;
            continue;
        }
        const double n_c = static_cast<double>(class_indices.size());
        const auto want = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(fraction * n_c + 0.5)));
        rng.shuffle(class_indices);
        for (std::size_t i = 0; i < want; ++i) keep[class_indices[i]] = true;
    }

    std::vector<int> selected;
    for (std::size_t i = 0; i < keep.size(); ++i)
        if (keep[i]) selected.push_back(static_cast<int>(i));

    LabeledDataset out;
    out.features = ds.features.select_rows(selected);
    out.labels.reserve(selected.size());
    for (int i : selected) out.labels.push_back(ds.labels[i]);
    out.class_count = ds.class_count;
    out.original_ids = ds.original_ids;
    return out;
}

namespace {

// AR(1) sequence with unit stationary marginal variance.
void fill_ar1(Rng& rng, double rho, std::span<double> out) {
    const double innovation_scale = std::sqrt(1.0 - rho * rho);
    double prev = rng.normal();
    out[0] = prev;
    for (std::size_t j = 1; j < out.size(); ++j) {
        prev = rho * prev + innovation_scale * rng.normal();
        out[j] = prev;
    }
}

LabeledDataset generate_with_counts(const SyntheticSpec& spec, int per_class) {
    const auto d = static_cast<std::size_t>(spec.band_count);
    const std::size_t n = static_cast<std::size_t>(spec.class_count) * per_class;

    LabeledDataset ds;
    ds.features = Matrix(n, d);
    ds.labels.reserve(n);
    ds.class_count = spec.class_count;
    ds.original_ids.resize(spec.class_count);
    std::iota(ds.original_ids.begin(), ds.original_ids.end(), 0LL);

    Rng rng(spec.seed);
    std::vector<double> mean(d), noise(d);
    std::size_t row = 0;
    for (int c = 0; c < spec.class_count; ++c) {
        fill_ar1(rng, spec.spectral_smoothness, mean);
        for (double& m : mean) m *= spec.class_separation;
        for (int s = 0; s < per_class; ++s, ++row) {
            fill_ar1(rng, spec.spectral_smoothness, noise);
            auto dest = ds.features.row(row);
            for (std::size_t j = 0; j < d; ++j)
                dest[j] = mean[j] + spec.noise_std * noise[j];
            ds.labels.push_back(c);
        }
    }
    return ds;
}

}  // namespace

LabeledDataset generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    return generate_with_counts(spec, spec.samples_per_class);
}

std::pair<LabeledDataset, LabeledDataset> generate_synthetic_pair(const SyntheticSpec& spec,
                                                                  int test_samples_per_class) {
    spec.validate();
    if (test_samples_per_class < 1)
        throw ValidationError("generate_synthetic_pair: test_samples_per_class must be >= 1");

    const LabeledDataset all =
        generate_with_counts(spec, spec.samples_per_class + test_samples_per_class);

    const int per_class = spec.samples_per_class + test_samples_per_class;
    std::vector<int> train_rows, test_rows;
    for (int c = 0; c < spec.class_count; ++c) {
        const int base = c * per_class;
        for (int s = 0; s < per_class; ++s)
            (s < spec.samples_per_class ? train_rows : test_rows).push_back(base + s);
    }

    auto take = [&](const std::vector<int>& rows) {
        LabeledDataset out;
        out.features = all.features.select_rows(rows);
        for (int i : rows) out.labels.push_back(all.labels[i]);
        out.class_count = all.class_count;
        out.original_ids = all.original_ids;
        return out;
    };
    return {take(train_rows), take(test_rows)};
}

Matrix Standardization::apply(const Matrix& features) const {
    if (features.cols() != means.size())
        throw std::invalid_argument("Standardization::apply: band count mismatch");
    Matrix out(features.rows(), features.cols());
    for (std::size_t i = 0; i < features.rows(); ++i)
        for (std::size_t j = 0; j < features.cols(); ++j)
            out(i, j) = (features(i, j) - means[j]) / scales[j];
    return out;
}

Matrix Standardization::invert(const Matrix& features) const {
    if (features.cols() != means.size())
        throw std::invalid_argument("Standardization::invert: band count mismatch");
    Matrix out(features.rows(), features.cols());
    for (std::size_t i = 0; i < features.rows(); ++i)
        for (std::size_t j = 0; j < features.cols(); ++j)
            out(i, j) = features(i, j) * scales[j] + means[j];
    return out;
}

std::pair<LabeledDataset, Standardization> standardize(const LabeledDataset& ds) {
    ds.validate();
    const std::size_t n = ds.sample_count();
    const std::size_t d = ds.band_count();

    Standardization transform;
    transform.means.resize(d);
    transform.scales.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += ds.features(i, j);
        const double mean = sum / static_cast<double>(n);
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dev = ds.features(i, j) - mean;
            sq += dev * dev;
        }
        const double std_dev = std::sqrt(sq / static_cast<double>(n - 1));
        transform.means[j] = mean;
        transform.scales[j] = std_dev < 1e-12 ? 1.0 : std_dev;
    }

    LabeledDataset out;
    out.features = transform.apply(ds.features);
    out.labels = ds.labels;
    out.class_count = ds.class_count;
    out.original_ids = ds.original_ids;
    return {std::move(out), std::move(transform)};
}

}  // namespace crrbf
