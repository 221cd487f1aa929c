#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "owsc/bench.hpp"
#include "owsc/cli_config.hpp"
#include "owsc/dataset.hpp"
#include "owsc/evaluator.hpp"
#include "owsc/trainer.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

long long ms_since(Clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw owsc::IoError(owsc::IoError::Kind::OpenFailed, "cannot open for writing: " + path);
    f << text;
    if (!f) throw owsc::IoError(owsc::IoError::Kind::WriteFailed, "write failed: " + path);
}

int cmd_synth(const std::string& config_path, const std::string& out_path,
              const std::optional<uint64_t>& seed_flag) {
    const auto start = Clock::now();
    auto config = owsc::parse_synth_config(owsc::load_json_file(config_path));
    config.synth.seed = owsc::resolve_seed(seed_flag, config.synth.seed);

    owsc::Dataset dataset = owsc::generate(config.synth);
    if (config.test_ratio > 0.0 && config.synth.states_per_object >= 2)
        dataset = owsc::split_by_state(dataset, config.test_ratio, config.synth.seed);
    owsc::write_features(out_path, dataset);
    owsc::write_manifest_json(out_path + ".objects.json", dataset);

    owsc::RunManifest manifest;
    manifest.command = "synth";
    manifest.resolved_config = owsc::synth_config_json(config);
    manifest.seed = config.synth.seed;
    manifest.inputs["config"] = config_path;
    manifest.outputs = {out_path, out_path + ".objects.json"};
    manifest.wall_ms = ms_since(start);
    owsc::write_run_manifest(out_path + ".run.json", manifest);

    std::cout << "wrote " << dataset.records.size() << " records (" << dataset.n_objects
              << " objects, " << dataset.n_categories << " categories, F=" << dataset.feature_dim
              << ") to " << out_path << "\n";
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& features_path,
              const std::string& out_dir, const std::string& resume_path,
              const std::optional<uint64_t>& seed_flag) {
    const auto start = Clock::now();
    owsc::TrainConfig config = owsc::parse_train_config(owsc::load_json_file(config_path));
    config.seed = owsc::resolve_seed(seed_flag, config.seed);

    const owsc::Dataset dataset = owsc::read_features(features_path);
    fs::create_directories(out_dir);

    owsc::TrainerState state;
    if (!resume_path.empty()) {
        state = owsc::load_train_state(resume_path + ".state");
        if (state.params.config.input_dim != dataset.feature_dim)
            throw owsc::ConfigError("resume checkpoint input_dim " +
                                    std::to_string(state.params.config.input_dim) +
                                    " does not match feature file F=" +
                                    std::to_string(dataset.feature_dim));
    } else {
        owsc::validate_for_training(dataset);
        state = owsc::init_trainer(config, dataset.feature_dim);
    }

    const std::string metrics_path = out_dir + "/metrics.csv";
    std::ofstream metrics(metrics_path, std::ios::binary | std::ios::trunc);
    if (!metrics)
        throw owsc::IoError(owsc::IoError::Kind::OpenFailed,
                            "cannot open for writing: " + metrics_path);
    metrics << owsc::kMetricsCsvHeader << "\n";

    std::vector<std::string> outputs = {metrics_path};
    auto checkpoint_to = [&](const std::string& base, const owsc::TrainerState& s) {
        owsc::save_checkpoint(base, s.params);
        owsc::save_train_state(base + ".state", s);
        outputs.push_back(base);
        outputs.push_back(base + ".state");
    };

    owsc::TrainResult result = owsc::run_training_from(
        std::move(state), config, dataset,
        [&](const owsc::EpochMetrics& m, const owsc::TrainerState& live) {
            metrics << owsc::metrics_csv_row(m) << "\n";
            metrics.flush();
            std::cout << "epoch " << m.epoch << " [" << owsc::strategy_name(m.strategy)
                      << "] l_joint=" << owsc::fmt_g(m.l_joint)
                      << " tau_info=" << owsc::fmt_g(m.tau_info) << "\n";
            if (m.epoch % config.checkpoint_period == 0 && m.epoch < config.epochs)
                checkpoint_to(out_dir + "/checkpoint_epoch_" + std::to_string(m.epoch) + ".owsp",
                              live);
        });
    if (!metrics)
        throw owsc::IoError(owsc::IoError::Kind::WriteFailed, "write failed: " + metrics_path);
    metrics.close();

    checkpoint_to(out_dir + "/checkpoint.owsp", result.state);

    owsc::RunManifest manifest;
    manifest.command = "train";
    manifest.resolved_config = owsc::train_config_json(config);
    manifest.seed = config.seed;
    manifest.inputs["config"] = config_path;
    manifest.inputs["features"] = features_path;
    manifest.outputs = outputs;
    manifest.wall_ms = ms_since(start);
    owsc::write_run_manifest(out_dir + "/run.json", manifest);

    std::cout << "trained " << result.metrics.size() << " epochs; checkpoint at " << out_dir
              << "/checkpoint.owsp\n";
    return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& features_path,
             const std::string& out_path, const std::string& classifier) {
    const auto start = Clock::now();
    const owsc::ParamSet params = owsc::load_checkpoint(checkpoint_path);
    const owsc::Dataset dataset = owsc::read_features(features_path);
    if (params.config.input_dim != dataset.feature_dim)
        throw owsc::ConfigError("checkpoint input_dim " +
                                std::to_string(params.config.input_dim) +
                                " does not match feature file F=" +
                                std::to_string(dataset.feature_dim));

    owsc::ClassifyMode mode;
    if (classifier == "nn")
        mode = owsc::ClassifyMode::NearestNeighbor;
    else if (classifier == "centroid")
        mode = owsc::ClassifyMode::Centroid;
    else
        throw owsc::ConfigError("unknown classifier '" + classifier +
                                "' (expected 'nn' or 'centroid')");

    const owsc::TaskReport report = owsc::run_eight_tasks(params, dataset, mode);
    const std::string run_id = owsc::hex64(owsc::file_digest(checkpoint_path) ^
                                           owsc::file_digest(features_path));
    write_text(out_path, std::string(owsc::kTaskReportCsvHeader) + "\n" +
                             owsc::task_report_csv_row(report, run_id) + "\n");
    std::cout << owsc::task_report_table(report);

    owsc::RunManifest manifest;
    manifest.command = "eval";
    manifest.resolved_config = {{"classifier", classifier}};
    manifest.seed = params.config.seed;
    manifest.inputs["checkpoint"] = checkpoint_path;
    manifest.inputs["features"] = features_path;
    manifest.outputs = {out_path};
    manifest.wall_ms = ms_since(start);
    owsc::write_run_manifest(out_path + ".run.json", manifest);
    return 0;
}

int cmd_export(const std::string& checkpoint_path, const std::string& features_path,
               const std::string& out_path) {
    const auto start = Clock::now();
    const owsc::ParamSet params = owsc::load_checkpoint(checkpoint_path);
    const owsc::Dataset dataset = owsc::read_features(features_path);
    if (params.config.input_dim != dataset.feature_dim)
        throw owsc::ConfigError("checkpoint input_dim " +
                                std::to_string(params.config.input_dim) +
                                " does not match feature file F=" +
                                std::to_string(dataset.feature_dim));
    owsc::export_embeddings(params, dataset, out_path);

    owsc::RunManifest manifest;
    manifest.command = "export";
    manifest.resolved_config = nlohmann::json::object();
    manifest.seed = params.config.seed;
    manifest.inputs["checkpoint"] = checkpoint_path;
    manifest.inputs["features"] = features_path;
    manifest.outputs = {out_path};
    manifest.wall_ms = ms_since(start);
    owsc::write_run_manifest(out_path + ".run.json", manifest);

    std::cout << "exported " << 2 * dataset.records.size() << " embedding rows to " << out_path
              << "\n";
    return 0;
}

int cmd_bench(const std::vector<int>& objects_per_category, int categories, int dim, int reps,
              int top_k, uint64_t seed, const std::string& out_path) {
    const auto start = Clock::now();
    const auto points =
        owsc::bench_sampling(objects_per_category, categories, dim, reps, top_k, seed);
    write_text(out_path, owsc::bench_csv(points));
    std::cout << owsc::bench_csv(points);

    nlohmann::json cfg{{"objects_per_category", objects_per_category},
                       {"categories", categories},
                       {"dim", dim},
                       {"reps", reps},
                       {"top_k", top_k},
                       {"seed", seed}};
    owsc::RunManifest manifest;
    manifest.command = "bench";
    manifest.resolved_config = cfg;
    manifest.seed = seed;
    manifest.outputs = {out_path};
    manifest.wall_ms = ms_since(start);
    owsc::write_run_manifest(out_path + ".run.json", manifest);
    return 0;
}

template <typename F>
int guarded(F&& fn) {
    try {
        return fn();
    } catch (const owsc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const owsc::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const owsc::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"curriculum metric-learning engine for state-invariant object embeddings"};
    app.require_subcommand(1);

    std::string config_path, features_path, checkpoint_path, out_path, out_dir, resume_path;
    std::string classifier = "nn";
    std::optional<uint64_t> seed_flag;
    std::vector<int> grid = {100, 400, 1600};
    int categories = 4, dim = 64, reps = 5, top_k = 5;
    uint64_t bench_seed = 0;

    auto* synth = app.add_subcommand("synth", "generate a synthetic feature file");
    synth->add_option("--config", config_path, "SynthConfig JSON")->required();
    synth->add_option("--out", out_path, "output feature file")->required();
    synth->add_option("--seed", seed_flag, "seed override (flag > OWSC_SEED > config)");

    auto* train = app.add_subcommand("train", "train the dual encoder");
    train->add_option("--config", config_path, "TrainConfig JSON")->required();
    train->add_option("--features", features_path, "input feature file")->required();
    train->add_option("--out-dir", out_dir, "output directory")->required();
    train->add_option("--resume", resume_path, "checkpoint to resume from (needs .state sidecar)");
    train->add_option("--seed", seed_flag, "seed override (flag > OWSC_SEED > config)");

    auto* eval = app.add_subcommand("eval", "run the eight benchmark tasks");
    eval->add_option("--checkpoint", checkpoint_path)->required();
    eval->add_option("--features", features_path)->required();
    eval->add_option("--out", out_path, "report CSV")->required();
    eval->add_option("--classifier", classifier, "nn (default) or centroid");

    auto* exp = app.add_subcommand("export", "export per-image embeddings as CSV");
    exp->add_option("--checkpoint", checkpoint_path)->required();
    exp->add_option("--features", features_path)->required();
    exp->add_option("--out", out_path)->required();

    auto* bench = app.add_subcommand("bench", "time the pair-sampling strategies");
    bench->add_option("--objects-per-category", grid, "grid of category sizes")->delimiter(',');
    bench->add_option("--categories", categories);
    bench->add_option("--dim", dim);
    bench->add_option("--reps", reps);
    bench->add_option("--top-k", top_k);
    bench->add_option("--seed", bench_seed);
    bench->add_option("--out", out_path, "timings CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (synth->parsed()) return guarded([&] { return cmd_synth(config_path, out_path, seed_flag); });
    if (train->parsed())
        return guarded(
            [&] { return cmd_train(config_path, features_path, out_dir, resume_path, seed_flag); });
    if (eval->parsed())
        return guarded([&] { return cmd_eval(checkpoint_path, features_path, out_path, classifier); });
    if (exp->parsed())
        return guarded([&] { return cmd_export(checkpoint_path, features_path, out_path); });
    if (bench->parsed())
        return guarded([&] {
            return cmd_bench(grid, categories, dim, reps, top_k, bench_seed, out_path);
        });
    return 2;
}
