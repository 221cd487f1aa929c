#include "owsc/dataset.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace owsc {

void SynthConfig::validate() const {
    if (n_categories < 1) throw ConfigError("synth config: n_categories must be >= 1");
    if (objects_per_category < 1) throw ConfigError("synth config: objects_per_category must be >= 1");
    if (states_per_object < 1) throw ConfigError("synth config: states_per_object must be >= 1");
    if (views_per_state < 1) throw ConfigError("synth config: views_per_state must be >= 1");
    if (feature_dim < 1) throw ConfigError("synth config: feature_dim must be >= 1");
    if (confuser_fraction < 0.0 || confuser_fraction > 1.0)
        throw ConfigError("synth config: confuser_fraction must be in [0,1]");
    if (confuser_fraction > 0.0 && n_categories < 2)
        throw ConfigError("synth config: confuser_fraction > 0 requires n_categories >= 2");
    if (state_warp_strength < 0.0) throw ConfigError("synth config: state_warp_strength must be >= 0");
    if (noise_sigma < 0.0) throw ConfigError("synth config: noise_sigma must be >= 0");
}

void Dataset::finalize() {
    std::set<uint32_t> objects;
    std::set<uint32_t> categories;
    manifest.clear();
    feature_dim = records.empty() ? 0 : static_cast<int>(records.front().feature.size());
    for (const auto& r : records) {
        if (static_cast<int>(r.feature.size()) != feature_dim)
            throw ConfigError("dataset: inconsistent feature dimension across records");
        auto it = manifest.find(r.object_id);
        if (it == manifest.end()) {
            manifest[r.object_id] = r.category_id;
        } else if (it->second != r.category_id) {
            throw ConfigError("dataset: object " + std::to_string(r.object_id) +
                              " mapped to more than one category");
        }
        objects.insert(r.object_id);
        categories.insert(r.category_id);
    }
    n_objects = static_cast<int>(objects.size());
    n_categories = static_cast<int>(categories.size());
}

std::map<uint32_t, std::vector<size_t>> Dataset::records_by_object(Split split) const {
    std::map<uint32_t, std::vector<size_t>> out;
    for (size_t i = 0; i < records.size(); ++i)
        if (records[i].split == split) out[records[i].object_id].push_back(i);
    return out;
}

size_t Dataset::count_split(Split split) const {
    size_t n = 0;
    for (const auto& r : records)
        if (r.split == split) ++n;
    return n;
}

namespace {

constexpr double kCategorySpread = 1.0;   // prototype scale
constexpr double kObjectSpread = 0.5;     // object offset from its prototype
constexpr double kJitterScale = 0.15;     // per-view pose perturbation
constexpr int kJitterRank = 2;            // rank of the pose modes
constexpr double kWarpBiasScale = 0.1;

std::vector<double> gaussian_vec(Rng& rng, int n, double scale) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = scale * rng.normal();
    return v;
}

}  // namespace

GenResult generate_full(const SynthConfig& config) {
    config.validate();
    const int f = config.feature_dim;
    const int n_obj = config.n_categories * config.objects_per_category;

    GenResult out;

    // Category prototypes and object latents near them.
    Rng proto_rng(derive_seed(config.seed, {1}));
    std::vector<std::vector<double>> prototypes(config.n_categories);
    for (int c = 0; c < config.n_categories; ++c)
        prototypes[c] = gaussian_vec(proto_rng, f, kCategorySpread);

    Rng latent_rng(derive_seed(config.seed, {2}));
    out.latents.resize(n_obj);
    for (int o = 0; o < n_obj; ++o) {
        const int c = o / config.objects_per_category;
        out.latents[o] = prototypes[c];
        for (int i = 0; i < f; ++i) out.latents[o][i] += kObjectSpread * latent_rng.normal();
    }

    // Plant cross-category near-duplicate pairs: the second object of a pair
    // takes the first object's latent plus an epsilon-sized offset.
    const auto n_pairs =
        static_cast<size_t>(std::llround(config.confuser_fraction * n_obj / 2.0));
    if (n_pairs > 0) {
        Rng conf_rng(derive_seed(config.seed, {3}));
        std::vector<uint32_t> order(n_obj);
        for (int o = 0; o < n_obj; ++o) order[o] = static_cast<uint32_t>(o);
        conf_rng.shuffle(order);
        std::vector<bool> used(n_obj, false);
        for (size_t i = 0; i < order.size() && out.confusers.size() < n_pairs; ++i) {
            const uint32_t a = order[i];
            if (used[a]) continue;
            const int cat_a = static_cast<int>(a) / config.objects_per_category;
            for (size_t j = i + 1; j < order.size(); ++j) {
                const uint32_t b = order[j];
                if (used[b]) continue;
                if (static_cast<int>(b) / config.objects_per_category == cat_a) continue;
                used[a] = used[b] = true;
                auto dir = gaussian_vec(conf_rng, f, 1.0);
                double norm = 0.0;
                for (double x : dir) norm += x * x;
                norm = std::sqrt(std::max(norm, 1e-300));
                for (int d = 0; d < f; ++d)
                    out.latents[b][d] = out.latents[a][d] + kConfuserEpsilon * dir[d] / norm;
                out.confusers.emplace_back(a, b);
                break;
            }
        }
    }

    // Category-level pose modes feeding the per-view jitter.
    std::vector<Mat> pose_modes(config.n_categories);
    for (int c = 0; c < config.n_categories; ++c) {
        Rng m_rng(derive_seed(config.seed, {4, static_cast<uint64_t>(c)}));
        Mat u(f, kJitterRank);
        for (double& x : u.a) x = m_rng.normal() / std::sqrt(static_cast<double>(f));
        pose_modes[c] = std::move(u);
    }

    // State warps, seeded per (category, state) so they do not depend on
    // emission order.
    const double w = config.state_warp_strength;
    auto warp_for = [&](int c, int s, Mat& wm, std::vector<double>& wb) {
        Rng w_rng(derive_seed(config.seed, {5, static_cast<uint64_t>(c), static_cast<uint64_t>(s)}));
        wm = Mat(f, f);
        for (double& x : wm.a) x = w_rng.normal() / std::sqrt(static_cast<double>(f));
        wb = gaussian_vec(w_rng, f, kWarpBiasScale);
    };

    Rng view_rng(derive_seed(config.seed, {6}));
    out.dataset.records.reserve(static_cast<size_t>(n_obj) * config.states_per_object *
                                config.views_per_state);
    std::vector<double> feat(f), warped(f), jittered(f);
    for (int o = 0; o < n_obj; ++o) {
        const int c = o / config.objects_per_category;
        const auto& latent = out.latents[o];
        for (int s = 0; s < config.states_per_object; ++s) {
            Mat wm;
            std::vector<double> wb;
            if (w != 0.0) warp_for(c, s, wm, wb);
            for (int v = 0; v < config.views_per_state; ++v) {
                if (w != 0.0) {
                    // Pose jitter perturbs only the warp input; with the warp
                    // disabled the feature is exactly the latent.
                    std::array<double, kJitterRank> z;
                    for (double& x : z) x = kJitterScale * view_rng.normal();
                    for (int d = 0; d < f; ++d) {
                        double j = 0.0;
                        for (int r = 0; r < kJitterRank; ++r) j += pose_modes[c](d, r) * z[r];
                        jittered[d] = latent[d] + j;
                    }
                    for (int d = 0; d < f; ++d) {
                        double acc = wb[d];
                        const double* row = wm.row(d);
                        for (int k = 0; k < f; ++k) acc += row[k] * jittered[k];
                        warped[d] = std::tanh(acc);
                    }
                    for (int d = 0; d < f; ++d) feat[d] = (1.0 - w) * latent[d] + w * warped[d];
                } else {
                    feat = latent;
                }
                if (config.noise_sigma > 0.0)
                    for (int d = 0; d < f; ++d) feat[d] += config.noise_sigma * view_rng.normal();

                FeatureRecord rec;
                rec.object_id = static_cast<uint32_t>(o);
                rec.category_id = static_cast<uint32_t>(c);
                rec.state_id = static_cast<uint32_t>(s);
                rec.split = Split::Train;
                rec.feature.resize(f);
                for (int d = 0; d < f; ++d) rec.feature[d] = static_cast<float>(feat[d]);
                out.dataset.records.push_back(std::move(rec));
            }
        }
    }
    out.dataset.finalize();
    return out;
}

Dataset generate(const SynthConfig& config) { return generate_full(config).dataset; }

Dataset split_by_state(const Dataset& dataset, double test_ratio, uint64_t seed) {
    if (test_ratio < 0.0 || test_ratio > 1.0)
        throw ConfigError("split_by_state: test_ratio must be in [0,1]");

    // Collect the state list per object, in first-appearance order.
    std::map<uint32_t, std::vector<uint32_t>> states;
    for (const auto& r : dataset.records) {
        auto& list = states[r.object_id];
        if (std::find(list.begin(), list.end(), r.state_id) == list.end())
            list.push_back(r.state_id);
    }
    std::map<uint32_t, std::set<uint32_t>> test_states;
    for (auto& [obj, list] : states) {
        if (list.size() < 2)
            throw ConfigError("split_by_state: object " + std::to_string(obj) +
                              " has a single state; need >= 2 states to hold one out");
        auto n_test = static_cast<size_t>(
            std::ceil(test_ratio * static_cast<double>(list.size()) - 1e-12));
        // Keep at least one train state per object.
        n_test = std::min(n_test, list.size() - 1);
        if (n_test == 0) continue;
        std::vector<uint32_t> shuffled = list;
        Rng rng(derive_seed(seed, {7, obj}));
        rng.shuffle(shuffled);
        test_states[obj] = std::set<uint32_t>(shuffled.begin(), shuffled.begin() + n_test);
    }

    Dataset out = dataset;
    for (auto& r : out.records) {
        auto it = test_states.find(r.object_id);
        const bool is_test = it != test_states.end() && it->second.count(r.state_id) > 0;
        r.split = is_test ? Split::Test : Split::Train;
    }
    out.finalize();
    return out;
}

namespace {

void put_u32(std::string& buf, uint32_t v) {
    buf.push_back(static_cast<char>(v & 0xff));
    buf.push_back(static_cast<char>((v >> 8) & 0xff));
    buf.push_back(static_cast<char>((v >> 16) & 0xff));
    buf.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f32(std::string& buf, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(buf, bits);
}

class Reader {
public:
    Reader(const std::string& data, const std::string& path) : data_(data), path_(path) {}

    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(data_[pos_ + i]);
        pos_ += 4;
        return v;
    }
    uint8_t u8() {
        need(1);
        return static_cast<uint8_t>(data_[pos_++]);
    }
    float f32() {
        const uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    bool at_end() const { return pos_ == data_.size(); }

private:
    void need(size_t n) {
        if (pos_ + n > data_.size())
            throw IoError(IoError::Kind::Truncated, "feature file truncated: " + path_);
    }
    const std::string& data_;
    std::string path_;
    size_t pos_ = 0;
};

}  // namespace

void write_features(const std::string& path, const Dataset& dataset) {
    std::string buf;
    buf.reserve(16 + dataset.records.size() * (13 + dataset.feature_dim * 4));
    buf += "OWSF";
    put_u32(buf, kFeatureFileVersion);
    put_u32(buf, static_cast<uint32_t>(dataset.records.size()));
    put_u32(buf, static_cast<uint32_t>(dataset.feature_dim));
    for (const auto& r : dataset.records) {
        put_u32(buf, r.object_id);
        put_u32(buf, r.category_id);
        put_u32(buf, r.state_id);
        buf.push_back(static_cast<char>(r.split == Split::Test ? 1 : 0));
        for (float x : r.feature) put_f32(buf, x);
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError(IoError::Kind::OpenFailed, "cannot open for writing: " + path);
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f) throw IoError(IoError::Kind::WriteFailed, "write failed: " + path);
}

Dataset read_features(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError(IoError::Kind::OpenFailed, "cannot open: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    const std::string data = ss.str();

    Reader r(data, path);
    if (data.size() < 4 || data.compare(0, 4, "OWSF") != 0)
        throw IoError(IoError::Kind::BadMagic, "not a feature file (bad magic): " + path);
    Reader body(data, path);
    body.u32();  // skip magic
    const uint32_t version = body.u32();
    if (version != kFeatureFileVersion)
        throw IoError(IoError::Kind::BadVersion,
                      "unsupported feature file version " + std::to_string(version) + ": " + path);
    const uint32_t n_records = body.u32();
    const uint32_t dim = body.u32();
    if (dim == 0) throw IoError(IoError::Kind::DimMismatch, "feature_dim is zero: " + path);

    Dataset out;
    out.records.reserve(n_records);
    for (uint32_t i = 0; i < n_records; ++i) {
        FeatureRecord rec;
        rec.object_id = body.u32();
        rec.category_id = body.u32();
        rec.state_id = body.u32();
        const uint8_t split = body.u8();
        if (split > 1)
            throw IoError(IoError::Kind::Truncated,
                          "invalid split byte in record " + std::to_string(i) + ": " + path);
        rec.split = split == 1 ? Split::Test : Split::Train;
        rec.feature.resize(dim);
        for (uint32_t d = 0; d < dim; ++d) rec.feature[d] = body.f32();
        out.records.push_back(std::move(rec));
    }
    if (!body.at_end())
        throw IoError(IoError::Kind::Truncated, "trailing bytes after records: " + path);
    out.finalize();
    if (out.feature_dim != static_cast<int>(dim) && n_records > 0)
        throw IoError(IoError::Kind::DimMismatch, "record dimension mismatch: " + path);
    out.feature_dim = static_cast<int>(dim);
    return out;
}

void write_manifest_json(const std::string& path, const Dataset& dataset) {
    std::string buf = "{\n";
    bool first = true;
    for (const auto& [obj, cat] : dataset.manifest) {
        if (!first) buf += ",\n";
        first = false;
        buf += "  \"" + std::to_string(obj) + "\": " + std::to_string(cat);
    }
    buf += "\n}\n";
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError(IoError::Kind::OpenFailed, "cannot open for writing: " + path);
    f << buf;
    if (!f) throw IoError(IoError::Kind::WriteFailed, "write failed: " + path);
}

void validate_for_training(const Dataset& dataset) {
    if (dataset.records.empty()) throw ConfigError("dataset: no records");
    std::map<uint32_t, int> per_category;
    for (const auto& [obj, cat] : dataset.manifest) per_category[cat]++;
    for (const auto& [cat, n] : per_category)
        if (n < 2)
            throw ConfigError("dataset: category " + std::to_string(cat) +
                              " has a single object; pair sampling needs >= 2");
    auto train = dataset.records_by_object(Split::Train);
    for (const auto& [obj, cat] : dataset.manifest)
        if (train.find(obj) == train.end() || train[obj].empty())
            throw ConfigError("dataset: object " + std::to_string(obj) + " has no train records");
}

}  // namespace owsc
