#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "owsc/annindex.hpp"
#include "owsc/dataset.hpp"

namespace owsc {

enum class StrategyId {
    S1RandomSameCat,
    S2NeighborsSameCat,
    S3NeighborsAnyCat,
};

std::string strategy_name(StrategyId s);
StrategyId strategy_from_name(const std::string& name);

struct CurriculumConfig {
    int slope = 2;   // c in f(N_e) = clamp(c * N_e, n_min, n_max)
    int n_min = 8;
    int n_max = 100;
    int top_k = 5;
    int views_per_object = 4;  // V
    // Applied cyclically from epoch 2; epoch 1 is always S1.
    std::vector<StrategyId> schedule = {StrategyId::S1RandomSameCat,
                                        StrategyId::S2NeighborsSameCat,
                                        StrategyId::S3NeighborsAnyCat};
    int kmeans_iters = 20;

    void validate() const;
};

/// One epoch's sampled object pairs plus the V train-image rows per object.
struct PairBatch {
    std::vector<std::pair<uint32_t, uint32_t>> pairs;      // (x, y), x unique
    std::map<uint32_t, std::vector<size_t>> images;        // object -> record indices
    StrategyId strategy = StrategyId::S1RandomSameCat;
    int epoch = 0;
};

/// Voronoi cell count for the S3 index at a given epoch, additionally capped
/// by the dataset size.
int partitions_for_epoch(int epoch, const CurriculumConfig& config, int n_objects);

StrategyId select_strategy(int epoch, const CurriculumConfig& config);

PairBatch sample_pairs_s1(const Dataset& dataset, int epoch, const CurriculumConfig& config,
                          Rng& rng);

/// Partner drawn uniformly from the object's top-k same-category neighbours
/// in the aggregate embedding space.
PairBatch sample_pairs_s2(const EmbeddingMap& aggregates, const Dataset& dataset, int epoch,
                          const CurriculumConfig& config, Rng& rng);

/// Partner drawn from the object's Voronoi cell of a fresh IVF index over the
/// aggregates; singleton cells fall back to same-category random sampling.
PairBatch sample_pairs_s3(const EmbeddingMap& aggregates, const Dataset& dataset, int epoch,
                          const CurriculumConfig& config, Rng& rng);

/// Strategy dispatch. Aggregates may be empty for S1.
PairBatch sample_pairs(StrategyId strategy, const EmbeddingMap& aggregates,
                       const Dataset& dataset, int epoch, const CurriculumConfig& config,
                       Rng& rng);

}  // namespace owsc
