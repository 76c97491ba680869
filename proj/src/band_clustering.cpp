#include "crrbf/band_clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "crrbf/errors.hpp"
#include "crrbf/rng.hpp"

namespace crrbf {

std::vector<std::vector<int>> BandClustering::clusters() const {
    std::vector<std::vector<int>> out(cluster_count);
    for (std::size_t band = 0; band < assignments.size(); ++band)
        out[assignments[band]].push_back(static_cast<int>(band));
    return out;
}

void BandClustering::validate() const {
    if (cluster_count < 1) throw ValidationError("clustering: cluster_count must be >= 1");
    if (assignments.size() < static_cast<std::size_t>(cluster_count))
        throw ValidationError("clustering: more clusters than bands");
    std::vector<bool> used(cluster_count, false);
    for (int id : assignments) {
        if (id < 0 || id >= cluster_count)
            throw ValidationError("clustering: cluster id outside [0, cluster_count)");
        used[id] = true;
    }
    for (int k = 0; k < cluster_count; ++k)
        if (!used[k]) throw ValidationError("clustering: cluster " + std::to_string(k) + " is empty");
}

Matrix band_points(const LabeledDataset& ds) {
    ds.validate();
    const std::size_t n = ds.sample_count();
    const std::size_t d = ds.band_count();
    Matrix points(d, n);
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
        auto row = points.row(j);
        if (std_dev < 1e-12) continue;  // constant band -> all zeros
        for (std::size_t i = 0; i < n; ++i) row[i] = (ds.features(i, j) - mean) / std_dev;
    }
    return points;
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

Matrix kmeanspp_init(const Matrix& points, int k, Rng& rng) {
    const std::size_t m = points.rows();
    Matrix centroids(k, points.cols());
    std::vector<double> d2(m, 0.0);

    auto copy_point = [&](std::size_t point, int slot) {
        const auto src = points.row(point);
        std::copy(src.begin(), src.end(), centroids.row(slot).begin());
    };

    copy_point(rng.below(m), 0);
    for (std::size_t i = 0; i < m; ++i)
        d2[i] = squared_distance(points.row(i), centroids.row(0));

    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t pick;
        if (total <= 0.0) {
            pick = rng.below(m);  // all remaining points duplicate a centroid
        } else {
            const double target = rng.uniform01() * total;
            double prefix = 0.0;
            pick = m - 1;
            for (std::size_t i = 0; i < m; ++i) {
                prefix += d2[i];
                if (prefix > target) {
                    pick = i;
                    break;
                }
            }
        }
        copy_point(pick, c);
        for (std::size_t i = 0; i < m; ++i)
            d2[i] = std::min(d2[i], squared_distance(points.row(i), centroids.row(c)));
    }
    return centroids;
}

void assign_nearest(const Matrix& points, const Matrix& centroids, std::vector<int>& assignments) {
    for (std::size_t i = 0; i < points.rows(); ++i) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centroids.rows(); ++c) {
            const double d = squared_distance(points.row(i), centroids.row(c));
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(c);
            }
        }
        assignments[i] = best;
    }
}

// If a cluster has no members, hand it the point farthest from its current
// centroid (drawn from a cluster with at least two members) and make that
// point the cluster's centroid.
void repair_empty(const Matrix& points, Matrix& centroids, std::vector<int>& assignments, int k) {
    std::vector<int> sizes(k, 0);
    for (int a : assignments) ++sizes[a];
    for (int empty = 0; empty < k; ++empty) {
        if (sizes[empty] > 0) continue;
        std::size_t farthest = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < points.rows(); ++i) {
            if (sizes[assignments[i]] < 2) continue;
            const double d = squared_distance(points.row(i), centroids.row(assignments[i]));
            if (d > far_d) {
                far_d = d;
                farthest = i;
            }
        }
        --sizes[assignments[farthest]];
        assignments[farthest] = empty;
        ++sizes[empty];
        const auto src = points.row(farthest);
        std::copy(src.begin(), src.end(), centroids.row(empty).begin());
    }
}

double total_inertia(const Matrix& points, const Matrix& centroids,
                     const std::vector<int>& assignments) {
    double s = 0.0;
    for (std::size_t i = 0; i < points.rows(); ++i)
        s += squared_distance(points.row(i), centroids.row(assignments[i]));
    return s;
}

KMeansResult kmeans_once(const Matrix& points, const KMeansConfig& config, std::uint64_t seed) {
    const int k = config.cluster_count;
    const std::size_t m = points.rows();
    Rng rng(seed);

    KMeansResult result;
    result.centroids = kmeanspp_init(points, k, rng);
    result.assignments.resize(m);
    assign_nearest(points, result.centroids, result.assignments);
    repair_empty(points, result.centroids, result.assignments, k);
    result.inertia = total_inertia(points, result.centroids, result.assignments);
    result.inertia_history.push_back(result.inertia);

    std::vector<int> sizes(k);
    for (int iter = 0; iter < config.max_iterations; ++iter) {
        // Update step; empty clusters keep their previous centroid.
        Matrix updated(k, points.cols());
        std::fill(sizes.begin(), sizes.end(), 0);
        for (std::size_t i = 0; i < m; ++i) {
            const int c = result.assignments[i];
            ++sizes[c];
            auto dest = updated.row(c);
            const auto src = points.row(i);
            for (std::size_t j = 0; j < src.size(); ++j) dest[j] += src[j];
        }
        double max_movement = 0.0;
        for (int c = 0; c < k; ++c) {
            auto dest = updated.row(c);
            if (sizes[c] == 0) {
                const auto prev = result.centroids.row(c);
                std::copy(prev.begin(), prev.end(), dest.begin());
            } else {
                for (double& v : dest) v /= sizes[c];
            }
            max_movement =
                std::max(max_movement, std::sqrt(squared_distance(dest, result.centroids.row(c))));
        }
        result.centroids = std::move(updated);

        assign_nearest(points, result.centroids, result.assignments);
        repair_empty(points, result.centroids, result.assignments, k);
        result.inertia = total_inertia(points, result.centroids, result.assignments);
        result.inertia_history.push_back(result.inertia);
        result.iterations = iter + 1;

        if (max_movement < config.tolerance) break;
    }
    return result;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, const KMeansConfig& config) {
    if (config.cluster_count < 1) throw std::invalid_argument("kmeans: cluster_count must be >= 1");
    if (static_cast<std::size_t>(config.cluster_count) > points.rows())
        throw std::invalid_argument("kmeans: more clusters than points");
    if (config.max_iterations < 1)
        throw std::invalid_argument("kmeans: max_iterations must be >= 1");
    if (config.tolerance < 0.0) throw std::invalid_argument("kmeans: tolerance must be >= 0");
    if (config.restarts < 1) throw std::invalid_argument("kmeans: restarts must be >= 1");
    for (double v : points.data())
        if (!std::isfinite(v)) throw std::invalid_argument("kmeans: points must be finite");

    KMeansResult best = kmeans_once(points, config, derive_seed(config.seed, 0));
    for (int r = 1; r < config.restarts; ++r) {
        KMeansResult candidate = kmeans_once(points, config, derive_seed(config.seed, r));
        if (candidate.inertia < best.inertia) best = std::move(candidate);
    }
    return best;
}

BandClustering cluster_bands(const LabeledDataset& ds, int cluster_count, std::uint64_t seed) {
    if (cluster_count < 1 || static_cast<std::size_t>(cluster_count) > ds.band_count())
        throw std::invalid_argument("cluster_bands: cluster_count must be in [1, band_count]");

    KMeansConfig config;
    config.cluster_count = cluster_count;
    config.seed = seed;
    const KMeansResult result = kmeans(band_points(ds), config);

    BandClustering clustering;
    clustering.assignments = result.assignments;
    clustering.cluster_count = cluster_count;
    clustering.validate();
    return clustering;
}

}  // namespace crrbf
