#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "owsc/common.hpp"

namespace owsc {

enum class Split : uint8_t { Train = 0, Test = 1 };

/// One image as a raw feature vector plus identity/category/state labels.
struct FeatureRecord {
    uint32_t object_id = 0;
    uint32_t category_id = 0;
    uint32_t state_id = 0;
    Split split = Split::Train;
    std::vector<float> feature;
};

struct SynthConfig {
    int n_categories = 4;
    int objects_per_category = 10;
    int states_per_object = 4;
    int views_per_state = 4;
    int feature_dim = 64;
    double confuser_fraction = 0.0;
    double state_warp_strength = 0.3;
    double noise_sigma = 0.05;
    uint64_t seed = 0;

    void validate() const;
};

struct Dataset {
    std::vector<FeatureRecord> records;
    int n_objects = 0;
    int n_categories = 0;
    int feature_dim = 0;
    std::map<uint32_t, uint32_t> manifest;  // object_id -> category_id

    /// Checks record/label consistency and recomputes the summary fields.
    void finalize();
    /// Record indices of one split, grouped per object (object id ascending).
    std::map<uint32_t, std::vector<size_t>> records_by_object(Split split) const;
    size_t count_split(Split split) const;
};

/// Generator internals exposed for verification: the per-object latent
/// identity vectors and which objects were planted as near-duplicates.
struct GenResult {
    Dataset dataset;
    std::vector<std::vector<double>> latents;              // per object id
    std::vector<std::pair<uint32_t, uint32_t>> confusers;  // planted pairs
};

/// Latent spacing used when planting cross-category near-duplicate objects.
inline constexpr double kConfuserEpsilon = 0.02;

GenResult generate_full(const SynthConfig& config);
Dataset generate(const SynthConfig& config);

/// Moves ceil(test_ratio * n_states) whole states of every object to the test
/// split (capped so at least one train state remains). All records start from
/// the split they currently carry being ignored; the assignment is recomputed.
Dataset split_by_state(const Dataset& dataset, double test_ratio, uint64_t seed);

// Feature file, little-endian:
//   magic "OWSF", u32 version=1, u32 n_records, u32 feature_dim,
//   then per record: u32 object_id, u32 category_id, u32 state_id,
//   u8 split (0=train, 1=test), feature_dim x f32.
inline constexpr uint32_t kFeatureFileVersion = 1;

void write_features(const std::string& path, const Dataset& dataset);
Dataset read_features(const std::string& path);

/// Companion manifest: JSON text mapping object_id -> category_id.
void write_manifest_json(const std::string& path, const Dataset& dataset);

/// Requirements for training: >=2 objects per category, >=2 states and >=1
/// train record per object. Throws ConfigError naming the offender.
void validate_for_training(const Dataset& dataset);

}  // namespace owsc
