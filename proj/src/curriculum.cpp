#include "owsc/curriculum.hpp"

#include <algorithm>

namespace owsc {

std::string strategy_name(StrategyId s) {
    switch (s) {
        case StrategyId::S1RandomSameCat: return "S1";
        case StrategyId::S2NeighborsSameCat: return "S2";
        case StrategyId::S3NeighborsAnyCat: return "S3";
    }
    return "?";
}

StrategyId strategy_from_name(const std::string& name) {
    if (name == "S1") return StrategyId::S1RandomSameCat;
    if (name == "S2") return StrategyId::S2NeighborsSameCat;
    if (name == "S3") return StrategyId::S3NeighborsAnyCat;
    throw ConfigError("unknown strategy '" + name + "' (expected S1, S2 or S3)");
}

void CurriculumConfig::validate() const {
    if (slope < 1) throw ConfigError("curriculum config: slope must be >= 1");
    if (n_min < 1) throw ConfigError("curriculum config: n_min must be >= 1");
    if (n_min > n_max) throw ConfigError("curriculum config: n_min must be <= n_max");
    if (top_k < 1) throw ConfigError("curriculum config: top_k must be >= 1");
    if (views_per_object < 1) throw ConfigError("curriculum config: views_per_object must be >= 1");
    if (schedule.empty()) throw ConfigError("curriculum config: schedule must not be empty");
    if (kmeans_iters < 1) throw ConfigError("curriculum config: kmeans_iters must be >= 1");
}

int partitions_for_epoch(int epoch, const CurriculumConfig& config, int n_objects) {
    if (epoch < 1) throw ConfigError("partitions_for_epoch: epoch must be >= 1");
    const long long ramp = static_cast<long long>(config.slope) * epoch;
    long long k = std::max<long long>(std::min<long long>(ramp, config.n_max), config.n_min);
    k = std::min<long long>(k, n_objects);
    return static_cast<int>(std::max<long long>(k, 1));
}

StrategyId select_strategy(int epoch, const CurriculumConfig& config) {
    if (epoch < 1) throw ConfigError("select_strategy: epoch must be >= 1");
    if (epoch == 1) return StrategyId::S1RandomSameCat;
    return config.schedule[static_cast<size_t>(epoch - 2) % config.schedule.size()];
}

namespace {

/// Objects grouped per category, ids ascending.
std::map<uint32_t, std::vector<uint32_t>> category_members(const Dataset& dataset) {
    std::map<uint32_t, std::vector<uint32_t>> members;
    for (const auto& [obj, cat] : dataset.manifest) members[cat].push_back(obj);
    return members;
}

uint32_t random_same_category(const std::vector<uint32_t>& members, uint32_t self, Rng& rng) {
    // One draw over the others: skip self by index shift.
    const size_t n = members.size();
    size_t self_pos = 0;
    while (members[self_pos] != self) ++self_pos;
    size_t idx = static_cast<size_t>(rng.uniform_below(n - 1));
    if (idx >= self_pos) ++idx;
    return members[idx];
}

/// V train-image rows per object involved in the batch; without replacement
/// unless the object has fewer than V train images.
void sample_images(const Dataset& dataset, const CurriculumConfig& config, PairBatch& batch,
                   Rng& rng) {
    const auto train = dataset.records_by_object(Split::Train);
    const int v = config.views_per_object;
    for (const auto& [obj, cat] : dataset.manifest) {
        (void)cat;
        auto it = train.find(obj);
        if (it == train.end() || it->second.empty())
            throw ConfigError("sampling: object " + std::to_string(obj) + " has no train images");
        const auto& rows = it->second;
        std::vector<size_t> chosen;
        if (rows.size() >= static_cast<size_t>(v)) {
            for (size_t pick : rng.sample_distinct(rows.size(), static_cast<size_t>(v)))
                chosen.push_back(rows[pick]);
        } else {
            for (int i = 0; i < v; ++i)
                chosen.push_back(rows[rng.uniform_below(rows.size())]);
        }
        batch.images[obj] = std::move(chosen);
    }
}

void require_pairable(const std::map<uint32_t, std::vector<uint32_t>>& members) {
    for (const auto& [cat, objs] : members)
        if (objs.size() < 2)
            throw ConfigError("sampling: category " + std::to_string(cat) +
                              " has a single object");
}

}  // namespace

PairBatch sample_pairs_s1(const Dataset& dataset, int epoch, const CurriculumConfig& config,
                          Rng& rng) {
    config.validate();
    const auto members = category_members(dataset);
    require_pairable(members);

    PairBatch batch;
    batch.strategy = StrategyId::S1RandomSameCat;
    batch.epoch = epoch;
    for (const auto& [obj, cat] : dataset.manifest)
        batch.pairs.emplace_back(obj, random_same_category(members.at(cat), obj, rng));
    sample_images(dataset, config, batch, rng);
    return batch;
}

PairBatch sample_pairs_s2(const EmbeddingMap& aggregates, const Dataset& dataset, int epoch,
                          const CurriculumConfig& config, Rng& rng) {
    config.validate();
    const auto members = category_members(dataset);
    require_pairable(members);

    AllNnOptions options;
    options.seed = rng.next_u64();
    const NeighborLists lists =
        all_nn_within_category(aggregates, dataset.manifest, config.top_k, options);

    PairBatch batch;
    batch.strategy = StrategyId::S2NeighborsSameCat;
    batch.epoch = epoch;
    for (const auto& [obj, cat] : dataset.manifest) {
        const auto& list = lists.at(obj);
        if (list.empty())
            throw ConfigError("sampling: object " + std::to_string(obj) +
                              " has no same-category neighbours");
        const auto& pick = list[rng.uniform_below(list.size())];
        batch.pairs.emplace_back(obj, pick.id);
        (void)cat;
    }
    sample_images(dataset, config, batch, rng);
    return batch;
}

PairBatch sample_pairs_s3(const EmbeddingMap& aggregates, const Dataset& dataset, int epoch,
                          const CurriculumConfig& config, Rng& rng) {
    config.validate();
    const auto members = category_members(dataset);
    require_pairable(members);

    const int k = partitions_for_epoch(epoch, config, static_cast<int>(aggregates.size()));
    const PartitionIndex index = build_ivf(aggregates, k, config.kmeans_iters, rng.next_u64());

    PairBatch batch;
    batch.strategy = StrategyId::S3NeighborsAnyCat;
    batch.epoch = epoch;
    for (const auto& [obj, cat] : dataset.manifest) {
        auto partner = sample_within_cell(index, obj, rng);
        if (!partner)  // singleton cell: same-category random fallback
            partner = random_same_category(members.at(cat), obj, rng);
        batch.pairs.emplace_back(obj, *partner);
    }
    sample_images(dataset, config, batch, rng);
    return batch;
}

PairBatch sample_pairs(StrategyId strategy, const EmbeddingMap& aggregates,
                       const Dataset& dataset, int epoch, const CurriculumConfig& config,
                       Rng& rng) {
    switch (strategy) {
        case StrategyId::S1RandomSameCat:
            return sample_pairs_s1(dataset, epoch, config, rng);
        case StrategyId::S2NeighborsSameCat:
            return sample_pairs_s2(aggregates, dataset, epoch, config, rng);
        case StrategyId::S3NeighborsAnyCat:
            return sample_pairs_s3(aggregates, dataset, epoch, config, rng);
    }
    throw ConfigError("sample_pairs: invalid strategy");
}

}  // namespace owsc
