#include "owsc/bench.hpp"

#include <algorithm>
#include <chrono>

namespace owsc {

namespace {

using Clock = std::chrono::steady_clock;

/// Minimal dataset: one zero-feature record per object, block category
/// assignment. Keeps the image-sampling part of the batch O(1) per object so
/// the measurement tracks the neighbour/index machinery.
Dataset bench_dataset(int categories, int objects_per_category) {
    Dataset d;
    const int n = categories * objects_per_category;
    d.records.reserve(n);
    for (int o = 0; o < n; ++o) {
        FeatureRecord r;
        r.object_id = static_cast<uint32_t>(o);
        r.category_id = static_cast<uint32_t>(o / objects_per_category);
        r.state_id = 0;
        r.split = Split::Train;
        r.feature = {0.0f};
        d.records.push_back(std::move(r));
    }
    d.finalize();
    return d;
}

EmbeddingMap bench_embeddings(int n, int dim, uint64_t seed) {
    Rng rng(derive_seed(seed, {41}));
    EmbeddingMap m;
    for (int o = 0; o < n; ++o) {
        std::vector<double> v(dim);
        for (double& x : v) x = rng.normal();
        m[static_cast<uint32_t>(o)] = std::move(v);
    }
    return m;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

}  // namespace

std::vector<BenchPoint> bench_sampling(const std::vector<int>& objects_per_category,
                                       int categories, int dim, int reps, int top_k,
                                       uint64_t seed) {
    if (categories < 2) throw ConfigError("bench: need at least 2 categories");
    if (reps < 1) throw ConfigError("bench: reps must be >= 1");
    for (int n : objects_per_category)
        if (n < 2) throw ConfigError("bench: objects_per_category entries must be >= 2");

    std::vector<BenchPoint> out;
    const StrategyId strategies[] = {StrategyId::S1RandomSameCat,
                                     StrategyId::S2NeighborsSameCat,
                                     StrategyId::S3NeighborsAnyCat};
    for (int n_per_cat : objects_per_category) {
        const int n = n_per_cat * categories;
        const Dataset dataset = bench_dataset(categories, n_per_cat);
        const EmbeddingMap embeddings = bench_embeddings(n, dim, seed);

        CurriculumConfig config;
        config.top_k = top_k;
        config.views_per_object = 1;
        // Steady-state S3 partition count (the n_max plateau).
        const int s3_epoch = (config.n_max + config.slope - 1) / config.slope;

        for (StrategyId strategy : strategies) {
            const int epoch = strategy == StrategyId::S3NeighborsAnyCat ? s3_epoch : 2;
            std::vector<double> times;
            times.reserve(reps);
            for (int r = 0; r < reps; ++r) {
                Rng rng(derive_seed(seed, {42, static_cast<uint64_t>(r)}));
                const auto start = Clock::now();
                PairBatch batch =
                    sample_pairs(strategy, embeddings, dataset, epoch, config, rng);
                const auto stop = Clock::now();
                if (batch.pairs.size() != static_cast<size_t>(n))
                    throw NumericError("bench: unexpected pair count");
                times.push_back(
                    std::chrono::duration<double, std::nano>(stop - start).count());
            }
            out.push_back({n_per_cat, strategy, median(times) / n});
        }
    }
    return out;
}

std::string bench_csv(const std::vector<BenchPoint>& points) {
    std::string out = "n_obj_per_cat,strategy,ns_per_object\n";
    for (const auto& p : points)
        out += std::to_string(p.objects_per_category) + "," + strategy_name(p.strategy) + "," +
               fmt_g(p.ns_per_object) + "\n";
    return out;
}

}  // namespace owsc
