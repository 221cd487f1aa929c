#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "owsc/curriculum.hpp"

namespace owsc {

struct BenchPoint {
    int objects_per_category = 0;
    StrategyId strategy = StrategyId::S1RandomSameCat;
    double ns_per_object = 0.0;
};

/// Times one full epoch of pair sampling per strategy on synthetic gaussian
/// embeddings, median over reps, reported per object. S3 runs at its n_max
/// partition count (the steady-state index size).
std::vector<BenchPoint> bench_sampling(const std::vector<int>& objects_per_category,
                                       int categories, int dim, int reps, int top_k,
                                       uint64_t seed);

std::string bench_csv(const std::vector<BenchPoint>& points);

}  // namespace owsc
