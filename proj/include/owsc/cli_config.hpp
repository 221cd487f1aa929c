#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "owsc/dataset.hpp"
#include "owsc/trainer.hpp"

namespace owsc {

inline constexpr const char* kProjectVersion = "0.1.0";

/// Synth command config: SynthConfig fields plus the split ratio applied
/// after generation.
struct SynthCommandConfig {
    SynthConfig synth;
    double test_ratio = 0.25;
};

/// Parses and validates; unknown or missing keys raise ConfigError naming
/// the key.
SynthCommandConfig parse_synth_config(const nlohmann::json& j);
TrainConfig parse_train_config(const nlohmann::json& j);

nlohmann::json synth_config_json(const SynthCommandConfig& config);
nlohmann::json train_config_json(const TrainConfig& config);

nlohmann::json load_json_file(const std::string& path);

/// Seed precedence: command-line flag > OWSC_SEED env var > config file.
uint64_t resolve_seed(const std::optional<uint64_t>& flag_seed, uint64_t file_seed);

uint64_t config_hash(const nlohmann::json& config);
uint64_t file_digest(const std::string& path);

struct RunManifest {
    std::string command;
    nlohmann::json resolved_config;
    uint64_t seed = 0;
    std::map<std::string, std::string> inputs;  // name -> path
    std::vector<std::string> outputs;
    long long wall_ms = 0;
};

nlohmann::json run_manifest_json(const RunManifest& manifest);
void write_run_manifest(const std::string& path, const RunManifest& manifest);

}  // namespace owsc
