#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "owsc/common.hpp"

namespace owsc {

// Distances in this module are squared L2 (monotone with L2, matches a flat
// quantizer). Callers that need metric distances take the square root at the
// boundary.

struct KMeansResult {
    Mat centroids;                          // K x D
    std::vector<int> assignment;            // per input point
    std::vector<double> objective_history;  // WCSS after each iteration
};

/// Lloyd iterations from a seeded sample of K distinct points. Empty clusters
/// are re-seeded from the point currently farthest from its centroid. Stops
/// early once assignments are stable.
KMeansResult kmeans_fit(const Mat& points, int k, int iters, uint64_t seed);

struct PartitionIndex {
    Mat centroids;                                 // K x D
    std::vector<std::vector<uint32_t>> inverted_lists;  // per cell, ids ascending
    std::map<uint32_t, int> assignment;            // object_id -> cell
    int k = 0;
};

using EmbeddingMap = std::map<uint32_t, std::vector<double>>;

PartitionIndex build_ivf(const EmbeddingMap& embeddings, int k, int iters, uint64_t seed);

struct Neighbor {
    uint32_t id = 0;
    double distance = 0.0;  // squared L2
};

/// Exact k-nearest-neighbours: min(k, |gallery \ exclude|) results sorted by
/// (distance, id) ascending.
std::vector<Neighbor> knn_exact(const std::vector<double>& query, const EmbeddingMap& gallery,
                                int k, const std::set<uint32_t>& exclude = {});

/// Per object, its k nearest same-category neighbours.
using NeighborLists = std::map<uint32_t, std::vector<Neighbor>>;

struct AllNnOptions {
    int exact_threshold = 64;  // categories up to this size use exact search
    int nprobe = 8;
    int kmeans_iters = 20;
    uint64_t seed = 0;
};

NeighborLists all_nn_within_category(const EmbeddingMap& embeddings,
                                     const std::map<uint32_t, uint32_t>& categories, int k,
                                     const AllNnOptions& options = {});

/// Uniformly random other object from the query's cell; empty when the cell
/// is a singleton (caller decides the fallback).
std::optional<uint32_t> sample_within_cell(const PartitionIndex& index, uint32_t object_id,
                                           Rng& rng);

}  // namespace owsc
