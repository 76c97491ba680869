#pragma once

#include <cstdint>
#include <vector>

#include "crrbf/dataset.hpp"
#include "crrbf/matrix.hpp"

namespace crrbf {

// Partition of the d band indices into cluster_count non-empty clusters.
struct BandClustering {
    std::vector<int> assignments;  // band index -> cluster id
    int cluster_count = 0;

    std::size_t band_count() const { return assignments.size(); }
    std::vector<std::vector<int>> clusters() const;

    // Throws ValidationError unless ids are in [0, cluster_count), every
    // cluster is non-empty and cluster_count <= band count.
    void validate() const;
};

struct KMeansConfig {
    int cluster_count = 1;
    int max_iterations = 100;
    double tolerance = 1e-6;  // convergence threshold on max centroid movement
    int restarts = 1;
    std::uint64_t seed = 0;
};

struct KMeansResult {
    std::vector<int> assignments;
    Matrix centroids;
    double inertia = 0.0;
    std::vector<double> inertia_history;  // one entry per Lloyd step, non-increasing
    int iterations = 0;
};

// Each band as its z-scored value vector across the training samples, so
// bands with similar information content land close together. Constant bands
// map to all-zero rows.
Matrix band_points(const LabeledDataset& ds);

// Lloyd's algorithm with k-means++ seeding. Clusters never come back empty:
// when one empties, the point farthest from its centroid is reassigned to it.
KMeansResult kmeans(const Matrix& points, const KMeansConfig& config);

BandClustering cluster_bands(const LabeledDataset& ds, int cluster_count, std::uint64_t seed);

}  // namespace crrbf
