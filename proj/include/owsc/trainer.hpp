#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "owsc/curriculum.hpp"
#include "owsc/dataset.hpp"
#include "owsc/embed.hpp"
#include "owsc/encoder.hpp"
#include "owsc/losses.hpp"

namespace owsc {

struct TrainConfig {
    int epochs = 30;
    int pairs_per_minibatch = 8;
    double learning_rate = 5e-5;
    int lr_halving_period = 30;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    Margins margins;
    CurriculumConfig curriculum;
    EncoderConfig encoder;
    int checkpoint_period = 10;
    uint64_t seed = 0;

    void validate() const;
};

struct EpochMetrics {
    int epoch = 0;
    StrategyId strategy = StrategyId::S1RandomSameCat;
    double l_piobj = 0.0;
    double l_picat = 0.0;
    double l_cat = 0.0;
    double l_joint = 0.0;
    double tau_info = 0.0;
    double d_max_intra = 0.0;
    double d_min_inter = 0.0;
    std::optional<double> rho;  // absent when d_max_intra == 0
    double lr = 0.0;
};

/// Step decay: learning_rate * 0.5^floor((epoch-1)/period).
double lr_at(int epoch, const TrainConfig& config);

struct AdamState {
    std::vector<double> m, v;
    long t = 0;

    void init(size_t n);
    void step(std::vector<double>& weights, const std::vector<double>& grads, double lr,
              double beta1, double beta2, double eps);
};

struct TrainerState {
    ParamSet params;
    AdamState adam;
    int epochs_done = 0;
};

/// Fresh state: encoder seeded from config.seed, input_dim from the dataset.
TrainerState init_trainer(const TrainConfig& config, int input_dim);

EpochMetrics train_epoch(TrainerState& state, const Dataset& dataset, int epoch,
                         const TrainConfig& config);

struct DiagnosticsResult {
    double d_max_intra = 0.0;
    double d_min_inter = 0.0;
    std::optional<double> rho;
};

/// Separation diagnostics over per-image object-space embeddings: the largest
/// within-object pairwise distance, the smallest cross-object distance, and
/// their ratio (unsquared L2).
DiagnosticsResult diagnostics(const Mat& embeddings, const std::vector<uint32_t>& object_ids);

struct TrainResult {
    TrainerState state;
    std::vector<EpochMetrics> metrics;
};

using EpochCallback = std::function<void(const EpochMetrics&, const TrainerState&)>;

TrainResult run_training(const TrainConfig& config, const Dataset& dataset,
                         const EpochCallback& on_epoch = {});

/// Resumable variant: continues from state (epochs_done+1 .. config.epochs).
TrainResult run_training_from(TrainerState state, const TrainConfig& config,
                              const Dataset& dataset, const EpochCallback& on_epoch = {});

inline constexpr const char* kMetricsCsvHeader =
    "epoch,strategy,l_piobj,l_picat,l_cat,l_joint,tau_info,d_max_intra,d_min_inter,rho,lr";

std::string metrics_csv_row(const EpochMetrics& m);
std::string metrics_csv(const std::vector<EpochMetrics>& metrics);

// Exact-resume training state (checkpoint sidecar): magic "OWST", u32
// version, encoder config as in the checkpoint header, u32 epochs_done,
// u64 adam_t, then params/m/v as f64 little-endian.
void save_train_state(const std::string& path, const TrainerState& state);
TrainerState load_train_state(const std::string& path);

}  // namespace owsc
