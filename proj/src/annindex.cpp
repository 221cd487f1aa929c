#include "owsc/annindex.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace owsc {

namespace {

int nearest_centroid(const Mat& centroids, const double* p, int d) {
    int best = 0;
    double best_d = squared_l2(centroids.row(0), p, d);
    for (int k = 1; k < centroids.rows; ++k) {
        const double dist = squared_l2(centroids.row(k), p, d);
        if (dist < best_d) {  // ties keep the lowest index
            best_d = dist;
            best = k;
        }
    }
    return best;
}

double wcss(const Mat& points, const Mat& centroids, const std::vector<int>& assignment) {
    double s = 0.0;
    for (int i = 0; i < points.rows; ++i)
        s += squared_l2(points.row(i), centroids.row(assignment[i]), points.cols);
    return s;
}

}  // namespace

KMeansResult kmeans_fit(const Mat& points, int k, int iters, uint64_t seed) {
    const int n = points.rows;
    const int d = points.cols;
    if (k < 1) throw ConfigError("kmeans: K must be >= 1");
    if (iters < 1) throw ConfigError("kmeans: iters must be >= 1");
    if (n < k)
        throw ConfigError("kmeans: need at least K points (" + std::to_string(n) + " < " +
                          std::to_string(k) + ")");

    KMeansResult res;
    res.centroids = Mat(k, d);
    Rng rng(derive_seed(seed, {11}));
    const auto init = rng.sample_distinct(static_cast<size_t>(n), static_cast<size_t>(k));
    for (int c = 0; c < k; ++c)
        std::copy_n(points.row(static_cast<int>(init[c])), d, res.centroids.row(c));

    res.assignment.assign(n, -1);
    std::vector<int> counts(k, 0);
    for (int it = 0; it < iters; ++it) {
        bool changed = false;
        std::fill(counts.begin(), counts.end(), 0);
        for (int i = 0; i < n; ++i) {
            const int c = nearest_centroid(res.centroids, points.row(i), d);
            if (c != res.assignment[i]) changed = true;
            res.assignment[i] = c;
            counts[c]++;
        }

        // Re-seed empty clusters from the points farthest from their current
        // centroid, one point per empty cluster.
        std::vector<bool> taken(n, false);
        for (int c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            int far_i = -1;
            double far_d = -1.0;
            for (int i = 0; i < n; ++i) {
                if (taken[i] || counts[res.assignment[i]] <= 1) continue;
                const double dist = squared_l2(points.row(i), res.centroids.row(res.assignment[i]), d);
                if (dist > far_d) {
                    far_d = dist;
                    far_i = i;
                }
            }
            if (far_i < 0) continue;
            taken[far_i] = true;
            counts[res.assignment[far_i]]--;
            res.assignment[far_i] = c;
            counts[c] = 1;
            std::copy_n(points.row(far_i), d, res.centroids.row(c));
            changed = true;
        }

        // Mean update.
        res.centroids.zero();
        for (int i = 0; i < n; ++i) {
            double* row = res.centroids.row(res.assignment[i]);
            const double* p = points.row(i);
            for (int j = 0; j < d; ++j) row[j] += p[j];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            double* row = res.centroids.row(c);
            for (int j = 0; j < d; ++j) row[j] /= counts[c];
        }

        res.objective_history.push_back(wcss(points, res.centroids, res.assignment));
        if (!changed) break;
    }

    // Final assignment against the final centroids so the Voronoi invariant
    // holds exactly.
    for (int i = 0; i < n; ++i)
        res.assignment[i] = nearest_centroid(res.centroids, points.row(i), d);
    return res;
}

PartitionIndex build_ivf(const EmbeddingMap& embeddings, int k, int iters, uint64_t seed) {
    const int n = static_cast<int>(embeddings.size());
    if (n == 0) throw ConfigError("build_ivf: no embeddings");
    const int d = static_cast<int>(embeddings.begin()->second.size());

    Mat points(n, d);
    std::vector<uint32_t> ids;
    ids.reserve(n);
    for (const auto& [id, vec] : embeddings) {
        if (static_cast<int>(vec.size()) != d)
            throw ConfigError("build_ivf: inconsistent embedding dimension");
        std::copy_n(vec.data(), d, points.row(static_cast<int>(ids.size())));
        ids.push_back(id);
    }

    const KMeansResult km = kmeans_fit(points, k, iters, seed);
    PartitionIndex index;
    index.centroids = km.centroids;
    index.k = k;
    index.inverted_lists.assign(k, {});
    for (int i = 0; i < n; ++i) {
        index.assignment[ids[i]] = km.assignment[i];
        index.inverted_lists[km.assignment[i]].push_back(ids[i]);
    }
    // EmbeddingMap iteration is id-ascending, so lists are already sorted.
    return index;
}

std::vector<Neighbor> knn_exact(const std::vector<double>& query, const EmbeddingMap& gallery,
                                int k, const std::set<uint32_t>& exclude) {
    if (k < 1) throw ConfigError("knn_exact: k must be >= 1");
    std::vector<Neighbor> all;
    all.reserve(gallery.size());
    for (const auto& [id, vec] : gallery) {
        if (exclude.count(id)) continue;
        all.push_back({id, squared_l2(query, vec)});
    }
    std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.id < b.id;
    });
    if (static_cast<int>(all.size()) > k) all.resize(k);
    return all;
}

namespace {

std::vector<Neighbor> topk_from_candidates(const std::vector<double>& query,
                                           const EmbeddingMap& embeddings,
                                           const std::vector<uint32_t>& candidates, uint32_t self,
                                           int k) {
    std::vector<Neighbor> out;
    out.reserve(candidates.size());
    for (uint32_t id : candidates) {
        if (id == self) continue;
        out.push_back({id, squared_l2(query, embeddings.at(id))});
    }
    std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.id < b.id;
    });
    if (static_cast<int>(out.size()) > k) out.resize(k);
    return out;
}

}  // namespace

NeighborLists all_nn_within_category(const EmbeddingMap& embeddings,
                                     const std::map<uint32_t, uint32_t>& categories, int k,
                                     const AllNnOptions& options) {
    if (k < 1) throw ConfigError("all_nn_within_category: k must be >= 1");

    std::map<uint32_t, std::vector<uint32_t>> members;
    for (const auto& [id, vec] : embeddings) {
        (void)vec;
        auto it = categories.find(id);
        if (it == categories.end())
            throw ConfigError("all_nn_within_category: object " + std::to_string(id) +
                              " has no category");
        members[it->second].push_back(id);
    }

    NeighborLists lists;
    for (const auto& [cat, ids] : members) {
        (void)cat;
        const int n_cat = static_cast<int>(ids.size());
        if (n_cat <= options.exact_threshold) {
            // Exact per-category search, small categories.
            for (uint32_t id : ids)
                lists[id] = topk_from_candidates(embeddings.at(id), embeddings, ids, id, k);
            continue;
        }

        // IVF-accelerated path: cluster the category into ~sqrt(n) cells and
        // probe the nprobe nearest cells per query.
        EmbeddingMap cat_embeddings;
        for (uint32_t id : ids) cat_embeddings[id] = embeddings.at(id);
        const int cells = std::max(
            1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_cat)))));
        const PartitionIndex index =
            build_ivf(cat_embeddings, cells, options.kmeans_iters, options.seed);
        const int nprobe = std::min(options.nprobe, cells);

        for (uint32_t id : ids) {
            const auto& q = embeddings.at(id);
            std::vector<std::pair<double, int>> cell_order(cells);
            for (int c = 0; c < cells; ++c)
                cell_order[c] = {squared_l2(index.centroids.row(c), q.data(),
                                            static_cast<int>(q.size())),
                                 c};
            std::sort(cell_order.begin(), cell_order.end());
            std::vector<uint32_t> candidates;
            for (int p = 0; p < nprobe; ++p) {
                const auto& list = index.inverted_lists[cell_order[p].second];
                candidates.insert(candidates.end(), list.begin(), list.end());
            }
            lists[id] = topk_from_candidates(q, embeddings, candidates, id, k);
        }
    }
    return lists;
}

std::optional<uint32_t> sample_within_cell(const PartitionIndex& index, uint32_t object_id,
                                           Rng& rng) {
    auto it = index.assignment.find(object_id);
    if (it == index.assignment.end())
        throw ConfigError("sample_within_cell: unknown object " + std::to_string(object_id));
    const auto& list = index.inverted_lists[it->second];
    if (list.size() <= 1) return std::nullopt;
    while (true) {
        const uint32_t pick = list[rng.uniform_below(list.size())];
        if (pick != object_id) return pick;
    }
}

}  // namespace owsc
