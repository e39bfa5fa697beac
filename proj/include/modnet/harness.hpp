#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "modnet/dataset.hpp"
#include "modnet/graph_core.hpp"
#include "modnet/mlp.hpp"
#include "modnet/spectral.hpp"

namespace modnet {

/// How edge weights are derived from a trained model.
enum class Method {
    Weights,   // |trained weight|
    Spearman,  // |Spearman correlation of endpoint activations over the test split|
};

std::string_view to_string(Method method);
Method parse_method(std::string_view text);

inline constexpr std::size_t kProtocolClusters = 4;
inline constexpr const char* kActivationRecording = "input=pixels/255; hidden=post-nonlinearity; output=logits";

struct ExperimentConfig {
    DatasetName dataset = DatasetName::Mnist;
    Activation activation = Activation::ReLU;
    bool dropout = false;
    Method method = Method::Weights;
    std::vector<std::size_t> hidden_widths = {256, 256, 256, 256};
    TrainConfig train;
    SpectralConfig spectral;

    MlpArchitecture architecture() const;

    /// Deviations from the reference protocol (k, architecture, epochs, batch size).
    std::vector<std::string> off_protocol_reasons() const;
};

/// Hex FNV-1a digest of everything that determines a trained model:
/// dataset, architecture, training hyperparameters and seed.
std::string config_hash(const ExperimentConfig& cfg);

struct StageTimes {
    double load_s = 0.0;
    double train_s = 0.0;
    double adjacency_s = 0.0;
    double cluster_s = 0.0;
};

struct ExperimentReport {
    std::string dataset;
    std::string activation;
    bool dropout = false;
    std::string method;
    std::size_t k = kProtocolClusters;
    std::vector<std::string> off_protocol;
    std::uint64_t seed = 0;
    std::uint64_t spectral_seed = 0;
    std::size_t epochs = 0;
    std::size_t batch_size = 0;
    std::vector<std::size_t> layer_widths;
    std::string config_hash;
    std::string checkpoint;

    std::optional<double> test_accuracy;  // percent
    double ncut = 0.0;
    std::size_t node_count = 0;
    std::vector<std::size_t> cluster_sizes;
    std::vector<std::vector<std::size_t>> layer_composition;  // [cluster][layer]
    std::size_t dropped_nodes = 0;
    std::vector<std::size_t> dropped_by_layer;
    double kmeans_cost = 0.0;
    std::vector<double> eigenvalues;

    bool correlation_rectified = true;
    std::string activation_recording = kActivationRecording;

    StageTimes wall_times;
};

nlohmann::json to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);

/// Report file stem, e.g. "mnist_relu_nodropout_weights_s1".
std::string report_stem(const ExperimentReport& report);

/// Writes `<dir>/<report_stem>.json` atomically and returns the path.
std::filesystem::path write_report(const std::filesystem::path& dir, const ExperimentReport& report);

/// Every *.json report in `dir` that parses as an ExperimentReport, sorted by file name.
std::vector<ExperimentReport> load_reports(const std::filesystem::path& dir);

/// Directory holding the IDX files of `dataset`: `<data_dir>/<name>` when it
/// exists, otherwise `data_dir` itself.
std::filesystem::path dataset_dir(const std::filesystem::path& data_dir, DatasetName dataset);

struct TrainedModel {
    MlpModel model;
    double test_accuracy = 0.0;  // percent
    std::filesystem::path checkpoint;
    bool reused = false;
    double train_s = 0.0;  // time spent training; carried over from the training summary on reuse
};

/// Loads the checkpoint named by config_hash(cfg) from `out_dir`, or trains and
/// saves it next to a `<stem>.train.json` summary (accuracy, losses, train time).
TrainedModel obtain_model(const ExperimentConfig& cfg, const DatasetSplits& data, const std::filesystem::path& out_dir);

/// Builds the method's adjacency for `model`, clusters it and fills the analysis
/// fields of a report. `test` is required for the Spearman method.
ExperimentReport analyze_model(const MlpModel& model, Method method, const SpectralConfig& spectral,
                               const LabeledImageSet* test);

/// Train-or-load, analyze, and write the report JSON plus checkpoint under out_dir.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& data_dir,
                                const std::filesystem::path& out_dir);

/// Re-runs the analysis of a stored checkpoint without retraining.
ExperimentReport analyze_checkpoint(const std::filesystem::path& checkpoint, Method method,
                                    const SpectralConfig& spectral, const LabeledImageSet* test);

struct GridConfig {
    ExperimentConfig base;                 // dataset/activation/dropout/method/seed are overridden
    std::vector<std::uint64_t> seeds = {0};
    std::vector<DatasetName> datasets = {DatasetName::Mnist, DatasetName::FashionMnist};
};

struct GridFailure {
    std::string job;
    std::string message;
};

struct GridTables {
    std::string weights_text;   // aligned table, Method 1
    std::string spearman_text;  // aligned table, Method 2
    std::string csv;            // per-seed and mean rows for both methods
    std::string claims_text;    // ordering claims evaluated per seed and on the mean
    nlohmann::json claims;
};

struct GridResult {
    std::vector<ExperimentReport> reports;
    std::vector<GridFailure> failures;
    GridTables tables;
};

/// All dataset x activation x dropout x seed models, each analyzed with both
/// methods from one shared training run. Failed jobs are recorded and the
/// grid continues. Tables and claims are written to out_dir.
GridResult run_grid(const GridConfig& grid, const std::filesystem::path& data_dir,
                    const std::filesystem::path& out_dir);

/// Renders the method tables, the CSV and the claim checks from reports.
GridTables render_tables(const std::vector<ExperimentReport>& reports);

}  // namespace modnet
