#include "owsc/trainer.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace owsc {

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("train config: epochs must be >= 1");
    if (pairs_per_minibatch < 1)
        throw ConfigError("train config: pairs_per_minibatch must be >= 1");
    if (learning_rate <= 0.0) throw ConfigError("train config: learning_rate must be > 0");
    if (lr_halving_period < 1) throw ConfigError("train config: lr_halving_period must be >= 1");
    if (checkpoint_period < 1) throw ConfigError("train config: checkpoint_period must be >= 1");
    margins.validate();
    curriculum.validate();
}

double lr_at(int epoch, const TrainConfig& config) {
    if (epoch < 1) throw ConfigError("lr_at: epoch must be >= 1");
    const int halvings = (epoch - 1) / config.lr_halving_period;
    return config.learning_rate * std::pow(0.5, halvings);
}

void AdamState::init(size_t n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
    t = 0;
}

void AdamState::step(std::vector<double>& weights, const std::vector<double>& grads, double lr,
                     double beta1, double beta2, double eps) {
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (size_t i = 0; i < weights.size(); ++i) {
        const double g = grads[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        weights[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

TrainerState init_trainer(const TrainConfig& config, int input_dim) {
    config.validate();
    EncoderConfig enc = config.encoder;
    enc.input_dim = input_dim;
    enc.seed = config.seed;
    TrainerState state;
    state.params = init_params(enc);
    state.adam.init(state.params.values.size());
    return state;
}

DiagnosticsResult diagnostics(const Mat& embeddings, const std::vector<uint32_t>& object_ids) {
    if (embeddings.rows != static_cast<int>(object_ids.size()))
        throw ConfigError("diagnostics: label count does not match embedding rows");
    DiagnosticsResult res;
    double max_intra = 0.0;
    double min_inter = -1.0;
    for (int i = 0; i < embeddings.rows; ++i) {
        for (int j = i + 1; j < embeddings.rows; ++j) {
            const double d =
                std::sqrt(squared_l2(embeddings.row(i), embeddings.row(j), embeddings.cols));
            if (object_ids[i] == object_ids[j]) {
                max_intra = std::max(max_intra, d);
            } else if (min_inter < 0.0 || d < min_inter) {
                min_inter = d;
            }
        }
    }
    res.d_max_intra = max_intra;
    res.d_min_inter = min_inter < 0.0 ? 0.0 : min_inter;
    if (max_intra > 0.0) res.rho = res.d_min_inter / max_intra;
    return res;
}

EpochMetrics train_epoch(TrainerState& state, const Dataset& dataset, int epoch,
                         const TrainConfig& config) {
    const StrategyId strategy = select_strategy(epoch, config.curriculum);
    Rng rng(derive_seed(config.seed, {31, static_cast<uint64_t>(epoch)}));

    EmbeddingMap aggregates;
    if (strategy != StrategyId::S1RandomSameCat)
        aggregates = object_aggregates(state.params, dataset, Split::Train);

    PairBatch batch =
        sample_pairs(strategy, aggregates, dataset, epoch, config.curriculum, rng);
    rng.shuffle(batch.pairs);

    const Objective objective = strategy == StrategyId::S3NeighborsAnyCat
                                    ? Objective::JointPartition
                                    : Objective::JointCategory;
    const double lr = lr_at(epoch, config);

    std::vector<LossBreakdown> breakdowns;
    breakdowns.reserve(batch.pairs.size());
    std::vector<double> grads(state.params.layout.total, 0.0);

    for (size_t start = 0; start < batch.pairs.size(); start += config.pairs_per_minibatch) {
        const size_t end =
            std::min(batch.pairs.size(), start + static_cast<size_t>(config.pairs_per_minibatch));

        std::set<uint32_t> unique;
        for (size_t p = start; p < end; ++p) {
            unique.insert(batch.pairs[p].first);
            unique.insert(batch.pairs[p].second);
        }

        // Encode each object once, ascending id (fixed rng consumption order).
        std::map<uint32_t, DualEmbedding> embeddings;
        std::map<uint32_t, EncodeCache> caches;
        PairBatchView view;
        for (uint32_t obj : unique) {
            EncodeCache& cache = caches[obj];
            embeddings[obj] = encode(state.params, features_for(dataset, batch.images.at(obj)),
                                     true, rng, &cache);
        }
        for (uint32_t obj : unique)
            view.objects.push_back({obj, dataset.manifest.at(obj), &embeddings.at(obj)});
        view.pairs.assign(batch.pairs.begin() + static_cast<long>(start),
                          batch.pairs.begin() + static_cast<long>(end));

        std::map<uint32_t, EmbeddingGrads> emb_grads;
        JointLossResult loss =
            loss_joint(view, config.margins, objective, Reduction::Mean, &emb_grads);
        if (!std::isfinite(loss.value))
            throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", pairs " +
                               std::to_string(start) + ".." + std::to_string(end - 1) +
                               " (strategy " + strategy_name(strategy) + ")");

        std::fill(grads.begin(), grads.end(), 0.0);
        for (uint32_t obj : unique)
            encode_backward(state.params, caches.at(obj), emb_grads.at(obj), grads);
        state.adam.step(state.params.values, grads, lr, config.adam_beta1, config.adam_beta2,
                        config.adam_eps);

        breakdowns.insert(breakdowns.end(), loss.per_pair.begin(), loss.per_pair.end());
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.strategy = strategy;
    m.lr = lr;
    int informative = 0;
    for (const auto& b : breakdowns) {
        m.l_piobj += b.l_piobj;
        m.l_picat += b.l_picat;
        m.l_cat += b.l_cat;
        m.l_joint += b.l_joint;
        if (b.informative) ++informative;
    }
    const double n = static_cast<double>(breakdowns.size());
    m.l_piobj /= n;
    m.l_picat /= n;
    m.l_cat /= n;
    m.l_joint /= n;
    m.tau_info = informative / n;

    // End-of-epoch separation diagnostics on train-split embeddings.
    const ImageEmbeddings images = embed_images(state.params, dataset, Split::Train);
    std::vector<uint32_t> labels(images.record_index.size());
    for (size_t i = 0; i < images.record_index.size(); ++i)
        labels[i] = dataset.records[images.record_index[i]].object_id;
    const DiagnosticsResult diag = diagnostics(images.obj, labels);
    m.d_max_intra = diag.d_max_intra;
    m.d_min_inter = diag.d_min_inter;
    m.rho = diag.rho;

    state.epochs_done = epoch;
    return m;
}

TrainResult run_training(const TrainConfig& config, const Dataset& dataset,
                         const EpochCallback& on_epoch) {
    config.validate();
    validate_for_training(dataset);
    return run_training_from(init_trainer(config, dataset.feature_dim), config, dataset,
                             on_epoch);
}

TrainResult run_training_from(TrainerState state, const TrainConfig& config,
                              const Dataset& dataset, const EpochCallback& on_epoch) {
    config.validate();
    validate_for_training(dataset);
    TrainResult res;
    res.state = std::move(state);
    for (int epoch = res.state.epochs_done + 1; epoch <= config.epochs; ++epoch) {
        EpochMetrics m = train_epoch(res.state, dataset, epoch, config);
        if (on_epoch) on_epoch(m, res.state);
        res.metrics.push_back(std::move(m));
    }
    return res;
}

std::string metrics_csv_row(const EpochMetrics& m) {
    std::string row = std::to_string(m.epoch) + "," + strategy_name(m.strategy) + "," +
                      fmt_g(m.l_piobj) + "," + fmt_g(m.l_picat) + "," + fmt_g(m.l_cat) + "," +
                      fmt_g(m.l_joint) + "," + fmt_g(m.tau_info) + "," + fmt_g(m.d_max_intra) +
                      "," + fmt_g(m.d_min_inter) + ",";
    if (m.rho) row += fmt_g(*m.rho);
    row += "," + fmt_g(m.lr);
    return row;
}

std::string metrics_csv(const std::vector<EpochMetrics>& metrics) {
    std::string out = std::string(kMetricsCsvHeader) + "\n";
    for (const auto& m : metrics) out += metrics_csv_row(m) + "\n";
    return out;
}

namespace {

void put_u32(std::string& buf, uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& buf, uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& buf, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(buf, bits);
}

struct StateReader {
    const std::string& data;
    const std::string& path;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > data.size())
            throw IoError(IoError::Kind::Truncated, "train state truncated: " + path);
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(data[pos + i]);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(data[pos + i]);
        pos += 8;
        return v;
    }
    double f64() {
        const uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    float f32() {
        const uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
};

constexpr uint32_t kTrainStateVersion = 1;

}  // namespace

void save_train_state(const std::string& path, const TrainerState& state) {
    std::string buf;
    const auto& cfg = state.params.config;
    buf += "OWST";
    put_u32(buf, kTrainStateVersion);
    put_u32(buf, static_cast<uint32_t>(cfg.input_dim));
    put_u32(buf, static_cast<uint32_t>(cfg.embed_dim));
    put_u32(buf, static_cast<uint32_t>(cfg.n_attention_layers));
    put_u32(buf, static_cast<uint32_t>(cfg.n_heads));
    {
        uint32_t bits;
        const float dp = static_cast<float>(cfg.dropout_rate);
        std::memcpy(&bits, &dp, 4);
        put_u32(buf, bits);
    }
    put_u64(buf, cfg.seed);
    put_u32(buf, static_cast<uint32_t>(state.epochs_done));
    put_u64(buf, static_cast<uint64_t>(state.adam.t));
    for (double x : state.params.values) put_f64(buf, x);
    for (double x : state.adam.m) put_f64(buf, x);
    for (double x : state.adam.v) put_f64(buf, x);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError(IoError::Kind::OpenFailed, "cannot open for writing: " + path);
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f) throw IoError(IoError::Kind::WriteFailed, "write failed: " + path);
}

TrainerState load_train_state(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError(IoError::Kind::OpenFailed, "cannot open: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    const std::string data = ss.str();
    if (data.size() < 4 || data.compare(0, 4, "OWST") != 0)
        throw IoError(IoError::Kind::BadMagic, "not a train state file (bad magic): " + path);

    StateReader r{data, path, 4};
    const uint32_t version = r.u32();
    if (version != kTrainStateVersion)
        throw IoError(IoError::Kind::BadVersion,
                      "unsupported train state version " + std::to_string(version) + ": " + path);
    EncoderConfig cfg;
    cfg.input_dim = static_cast<int>(r.u32());
    cfg.embed_dim = static_cast<int>(r.u32());
    cfg.n_attention_layers = static_cast<int>(r.u32());
    cfg.n_heads = static_cast<int>(r.u32());
    cfg.dropout_rate = r.f32();
    cfg.seed = r.u64();
    cfg.validate();

    TrainerState state;
    state.params.config = cfg;
    state.params.layout = ParamLayout(cfg);
    state.epochs_done = static_cast<int>(r.u32());
    state.adam.t = static_cast<long>(r.u64());
    state.params.values.resize(state.params.layout.total);
    state.adam.m.resize(state.params.layout.total);
    state.adam.v.resize(state.params.layout.total);
    for (double& x : state.params.values) x = r.f64();
    for (double& x : state.adam.m) x = r.f64();
    for (double& x : state.adam.v) x = r.f64();
    if (r.pos != data.size())
        throw IoError(IoError::Kind::Truncated, "trailing bytes in train state: " + path);
    return state;
}

}  // namespace owsc
