#include "owsc/cli_config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

namespace owsc {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& ctx, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(ctx + ": expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(ctx + ": unknown field '" + it.key() + "'");
}

const json& require(const json& j, const std::string& ctx, const std::string& key) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(ctx + ": missing field '" + key + "'");
    return *it;
}

int require_int(const json& j, const std::string& ctx, const std::string& key) {
    const json& v = require(j, ctx, key);
    if (!v.is_number_integer())
        throw ConfigError(ctx + ": field '" + key + "' must be an integer");
    return v.get<int>();
}

uint64_t require_u64(const json& j, const std::string& ctx, const std::string& key) {
    const json& v = require(j, ctx, key);
    if (!v.is_number_integer())
        throw ConfigError(ctx + ": field '" + key + "' must be an integer");
    return v.get<uint64_t>();
}

double get_num(const json& j, const std::string& ctx, const std::string& key, double def) {
    auto it = j.find(key);
    if (it == j.end()) return def;
    if (!it->is_number()) throw ConfigError(ctx + ": field '" + key + "' must be a number");
    return it->get<double>();
}

int get_int(const json& j, const std::string& ctx, const std::string& key, int def) {
    auto it = j.find(key);
    if (it == j.end()) return def;
    if (!it->is_number_integer())
        throw ConfigError(ctx + ": field '" + key + "' must be an integer");
    return it->get<int>();
}

uint64_t get_u64(const json& j, const std::string& ctx, const std::string& key, uint64_t def) {
    auto it = j.find(key);
    if (it == j.end()) return def;
    if (!it->is_number_integer())
        throw ConfigError(ctx + ": field '" + key + "' must be an integer");
    return it->get<uint64_t>();
}

}  // namespace

SynthCommandConfig parse_synth_config(const json& j) {
    const std::string ctx = "synth config";
    check_keys(j, ctx,
               {"n_categories", "objects_per_category", "states_per_object", "views_per_state",
                "feature_dim", "confuser_fraction", "state_warp_strength", "noise_sigma", "seed",
                "test_ratio"});
    SynthCommandConfig c;
    c.synth.n_categories = require_int(j, ctx, "n_categories");
    c.synth.objects_per_category = require_int(j, ctx, "objects_per_category");
    c.synth.states_per_object = require_int(j, ctx, "states_per_object");
    c.synth.views_per_state = require_int(j, ctx, "views_per_state");
    c.synth.feature_dim = require_int(j, ctx, "feature_dim");
    c.synth.confuser_fraction = get_num(j, ctx, "confuser_fraction", 0.0);
    c.synth.state_warp_strength = get_num(j, ctx, "state_warp_strength", 0.3);
    c.synth.noise_sigma = get_num(j, ctx, "noise_sigma", 0.05);
    c.synth.seed = require_u64(j, ctx, "seed");
    c.test_ratio = get_num(j, ctx, "test_ratio", 0.25);
    c.synth.validate();
    if (c.test_ratio < 0.0 || c.test_ratio > 1.0)
        throw ConfigError(ctx + ": field 'test_ratio' must be in [0,1]");
    return c;
}

TrainConfig parse_train_config(const json& j) {
    const std::string ctx = "train config";
    check_keys(j, ctx,
               {"epochs", "pairs_per_minibatch", "learning_rate", "lr_halving_period",
                "checkpoint_period", "seed", "margins", "curriculum", "encoder"});
    TrainConfig c;
    c.epochs = get_int(j, ctx, "epochs", c.epochs);
    c.pairs_per_minibatch = get_int(j, ctx, "pairs_per_minibatch", c.pairs_per_minibatch);
    c.learning_rate = get_num(j, ctx, "learning_rate", c.learning_rate);
    c.lr_halving_period = get_int(j, ctx, "lr_halving_period", c.lr_halving_period);
    c.checkpoint_period = get_int(j, ctx, "checkpoint_period", c.checkpoint_period);
    c.seed = get_u64(j, ctx, "seed", c.seed);

    if (j.contains("margins")) {
        const json& m = j.at("margins");
        const std::string mctx = "train config margins";
        check_keys(m, mctx, {"alpha", "beta", "theta", "gamma"});
        c.margins.alpha = get_num(m, mctx, "alpha", c.margins.alpha);
        c.margins.beta = get_num(m, mctx, "beta", c.margins.beta);
        c.margins.theta = get_num(m, mctx, "theta", c.margins.theta);
        c.margins.gamma = get_num(m, mctx, "gamma", c.margins.gamma);
    }
    if (j.contains("curriculum")) {
        const json& cu = j.at("curriculum");
        const std::string cctx = "train config curriculum";
        check_keys(cu, cctx,
                   {"slope", "n_min", "n_max", "top_k", "views_per_object", "schedule",
                    "kmeans_iters"});
        c.curriculum.slope = get_int(cu, cctx, "slope", c.curriculum.slope);
        c.curriculum.n_min = get_int(cu, cctx, "n_min", c.curriculum.n_min);
        c.curriculum.n_max = get_int(cu, cctx, "n_max", c.curriculum.n_max);
        c.curriculum.top_k = get_int(cu, cctx, "top_k", c.curriculum.top_k);
        c.curriculum.views_per_object =
            get_int(cu, cctx, "views_per_object", c.curriculum.views_per_object);
        c.curriculum.kmeans_iters = get_int(cu, cctx, "kmeans_iters", c.curriculum.kmeans_iters);
        if (cu.contains("schedule")) {
            const json& s = cu.at("schedule");
            if (!s.is_array()) throw ConfigError(cctx + ": field 'schedule' must be an array");
            c.curriculum.schedule.clear();
            for (const auto& entry : s) {
                if (!entry.is_string())
                    throw ConfigError(cctx + ": schedule entries must be strings");
                c.curriculum.schedule.push_back(strategy_from_name(entry.get<std::string>()));
            }
        }
    }
    if (j.contains("encoder")) {
        const json& e = j.at("encoder");
        const std::string ectx = "train config encoder";
        check_keys(e, ectx, {"embed_dim", "n_attention_layers", "n_heads", "dropout_rate"});
        c.encoder.embed_dim = get_int(e, ectx, "embed_dim", c.encoder.embed_dim);
        c.encoder.n_attention_layers =
            get_int(e, ectx, "n_attention_layers", c.encoder.n_attention_layers);
        c.encoder.n_heads = get_int(e, ectx, "n_heads", c.encoder.n_heads);
        c.encoder.dropout_rate = get_num(e, ectx, "dropout_rate", c.encoder.dropout_rate);
    }
    c.validate();
    return c;
}

json synth_config_json(const SynthCommandConfig& c) {
    return json{{"n_categories", c.synth.n_categories},
                {"objects_per_category", c.synth.objects_per_category},
                {"states_per_object", c.synth.states_per_object},
                {"views_per_state", c.synth.views_per_state},
                {"feature_dim", c.synth.feature_dim},
                {"confuser_fraction", c.synth.confuser_fraction},
                {"state_warp_strength", c.synth.state_warp_strength},
                {"noise_sigma", c.synth.noise_sigma},
                {"seed", c.synth.seed},
                {"test_ratio", c.test_ratio}};
}

json train_config_json(const TrainConfig& c) {
    json schedule = json::array();
    for (StrategyId s : c.curriculum.schedule) schedule.push_back(strategy_name(s));
    return json{
        {"epochs", c.epochs},
        {"pairs_per_minibatch", c.pairs_per_minibatch},
        {"learning_rate", c.learning_rate},
        {"lr_halving_period", c.lr_halving_period},
        {"checkpoint_period", c.checkpoint_period},
        {"seed", c.seed},
        {"margins",
         {{"alpha", c.margins.alpha},
          {"beta", c.margins.beta},
          {"theta", c.margins.theta},
          {"gamma", c.margins.gamma}}},
        {"curriculum",
         {{"slope", c.curriculum.slope},
          {"n_min", c.curriculum.n_min},
          {"n_max", c.curriculum.n_max},
          {"top_k", c.curriculum.top_k},
          {"views_per_object", c.curriculum.views_per_object},
          {"schedule", schedule},
          {"kmeans_iters", c.curriculum.kmeans_iters}}},
        {"encoder",
         {{"embed_dim", c.encoder.embed_dim},
          {"n_attention_layers", c.encoder.n_attention_layers},
          {"n_heads", c.encoder.n_heads},
          {"dropout_rate", c.encoder.dropout_rate}}}};
}

json load_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError(IoError::Kind::OpenFailed, "cannot open config: " + path);
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError("invalid JSON in " + path + ": " + e.what());
    }
}

uint64_t resolve_seed(const std::optional<uint64_t>& flag_seed, uint64_t file_seed) {
    if (flag_seed) return *flag_seed;
    if (const char* env = std::getenv("OWSC_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw ConfigError("OWSC_SEED must be an unsigned integer, got '" +
                              std::string(env) + "'");
        }
    }
    return file_seed;
}

uint64_t config_hash(const json& config) {
    // nlohmann objects iterate key-sorted, so dump() is canonical.
    return fnv1a64(config.dump());
}

uint64_t file_digest(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError(IoError::Kind::OpenFailed, "cannot open: " + path);
    uint64_t h = 0xcbf29ce484222325ull;
    char buf[65536];
    while (f) {
        f.read(buf, sizeof(buf));
        h = fnv1a64(buf, static_cast<size_t>(f.gcount()), h);
    }
    return h;
}

json run_manifest_json(const RunManifest& m) {
    json inputs = json::object();
    for (const auto& [name, path] : m.inputs)
        inputs[name] = json{{"path", path}, {"digest", hex64(file_digest(path))}};
    return json{{"command", m.command},
                {"config_hash", hex64(config_hash(m.resolved_config))},
                {"resolved_config", m.resolved_config},
                {"seed", m.seed},
                {"versions",
                 {{"owsc", kProjectVersion},
                  {"feature_file", kFeatureFileVersion},
                  {"checkpoint", kCheckpointVersion}}},
                {"inputs", inputs},
                {"outputs", m.outputs},
                {"wall_ms", m.wall_ms}};
}

void write_run_manifest(const std::string& path, const RunManifest& manifest) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError(IoError::Kind::OpenFailed, "cannot open for writing: " + path);
    f << run_manifest_json(manifest).dump(2) << "\n";
    if (!f) throw IoError(IoError::Kind::WriteFailed, "write failed: " + path);
}

}  // namespace owsc
