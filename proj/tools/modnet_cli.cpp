// modnet: train MLPs, measure their modularity (spectral ncut) and render the
// activation-function comparison tables.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "modnet/checkpoint.hpp"
#include "modnet/error.hpp"
#include "modnet/harness.hpp"

namespace fs = std::filesystem;
using namespace modnet;

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            seeds.push_back(std::stoull(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw usage_error("bad seed '" + item + "' in --seeds");
        }
    }
    if (seeds.empty()) throw usage_error("--seeds needs at least one value");
    return seeds;
}

std::vector<DatasetName> parse_datasets(const std::string& text) {
    std::vector<DatasetName> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(parse_dataset_name(item));
    }
    if (out.empty()) throw usage_error("--datasets needs at least one value");
    return out;
}

void print_summary(const ExperimentReport& r) {
    std::cout << report_stem(r) << ": ";
    if (r.test_accuracy) std::cout << "test accuracy " << *r.test_accuracy << "%, ";
    std::cout << "ncut " << r.ncut << " (k=" << r.k << ", dropped " << r.dropped_nodes << " of " << r.node_count
              << " nodes)\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Modularity of trained MLPs via spectral normalized cuts"};
    app.require_subcommand(1);

    // train
    auto* train_cmd = app.add_subcommand("train", "Train one MLP and write its checkpoint");
    std::string dataset = "mnist", activation = "relu", data_dir, out_dir;
    bool dropout = false;
    std::size_t epochs = 20;
    std::uint64_t seed = 0;
    train_cmd->add_option("--dataset", dataset, "mnist | fashion_mnist | custom")->required();
    train_cmd->add_option("--activation", activation, "relu | sigmoid")->required();
    train_cmd->add_flag("--dropout", dropout, "Dropout 0.5 on hidden layers");
    train_cmd->add_option("--epochs", epochs, "Training epochs")->capture_default_str();
    train_cmd->add_option("--seed", seed, "RNG seed")->capture_default_str();
    train_cmd->add_option("--data-dir", data_dir, "Directory with IDX files (or a <dataset>/ subdirectory)")->required();
    train_cmd->add_option("--out", out_dir, "Output directory")->required();

    // analyze
    auto* analyze_cmd = app.add_subcommand("analyze", "Cluster a stored checkpoint and report its ncut");
    std::string checkpoint, method = "weights";
    std::size_t k = kProtocolClusters;
    analyze_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file (.mlpc)")->required();
    analyze_cmd->add_option("--method", method, "weights | spearman")->required();
    analyze_cmd->add_option("--data-dir", data_dir, "Directory with the test split (needed for spearman)");
    analyze_cmd->add_option("--k", k, "Cluster count")->capture_default_str();
    analyze_cmd->add_option("--seed", seed, "k-means seed")->capture_default_str();
    analyze_cmd->add_option("--out", out_dir, "Output directory")->required();

    // grid
    auto* grid_cmd = app.add_subcommand("grid", "Run the full dataset x activation x dropout grid under both methods");
    std::string seeds_text = "0", datasets_text = "mnist,fashion_mnist";
    grid_cmd->add_option("--seeds", seeds_text, "Comma-separated seeds")->capture_default_str();
    grid_cmd->add_option("--datasets", datasets_text, "Comma-separated datasets")->capture_default_str();
    grid_cmd->add_option("--epochs", epochs, "Training epochs")->capture_default_str();
    grid_cmd->add_option("--data-dir", data_dir, "Directory with mnist/ and fashion_mnist/ subdirectories")->required();
    grid_cmd->add_option("--out", out_dir, "Output directory")->required();

    // report
    auto* report_cmd = app.add_subcommand("report", "Render tables from stored report JSON");
    std::string in_dir;
    report_cmd->add_option("--in", in_dir, "Directory with report JSON files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_code(ErrorKind::Usage);
    }

    try {
        if (*train_cmd) {
            ExperimentConfig cfg;
            cfg.dataset = parse_dataset_name(dataset);
            cfg.activation = parse_activation(activation);
            cfg.dropout = dropout;
            cfg.train.epochs = epochs;
            cfg.train.rng_seed = seed;
            cfg.train.validate();
            const auto data = load_dataset(cfg.dataset, dataset_dir(data_dir, cfg.dataset));
            const auto trained = obtain_model(cfg, data, out_dir);
            std::cout << (trained.reused ? "reused " : "trained ") << trained.checkpoint.string() << ": test accuracy "
                      << trained.test_accuracy << "% (training took " << trained.train_s << " s)\n";
        } else if (*analyze_cmd) {
            SpectralConfig spectral;
            spectral.k = k;
            spectral.rng_seed = seed;
            std::optional<LabeledImageSet> test;
            if (!data_dir.empty()) test = load_split(data_dir, Split::Test);
            auto report = analyze_checkpoint(checkpoint, parse_method(method), spectral, test ? &*test : nullptr);
            report.dataset = fs::path(checkpoint).stem().string();
            report.seed = seed;
            const auto path = write_report(out_dir, report);
            print_summary(report);
            std::cout << "wrote " << path.string() << "\n";
        } else if (*grid_cmd) {
            GridConfig grid;
            grid.seeds = parse_seeds(seeds_text);
            grid.datasets = parse_datasets(datasets_text);
            grid.base.train.epochs = epochs;
            const auto result = run_grid(grid, data_dir, out_dir);
            for (const auto& r : result.reports) print_summary(r);
            std::cout << '\n' << result.tables.weights_text << '\n' << result.tables.spearman_text << '\n'
                      << result.tables.claims_text;
            for (const auto& f : result.failures) std::cerr << "FAILED " << f.job << ": " << f.message << "\n";
            if (!result.failures.empty()) return exit_code(ErrorKind::Data);
        } else if (*report_cmd) {
            const auto tables = render_tables(load_reports(in_dir));
            std::cout << tables.weights_text << '\n' << tables.spearman_text << '\n' << tables.claims_text;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(ErrorKind::Data);
    }
    return 0;
}
