#include "modnet/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "modnet/checkpoint.hpp"
#include "modnet/correlation.hpp"
#include "modnet/error.hpp"

namespace modnet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs `fn`, prefixing any library error with the stage name.
template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("stage '") + name + "': " + e.what());
    } catch (const std::exception& e) {
        throw Error(ErrorKind::Data, std::string("stage '") + name + "': " + e.what());
    }
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

void write_text_atomic(const fs::path& path, const std::string& text) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw data_error("cannot write " + tmp.string());
        out << text;
        if (!out) throw data_error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string dropout_tag(bool dropout) { return dropout ? "dropout" : "nodropout"; }

std::string model_stem(const ExperimentConfig& cfg) {
    return std::string(to_string(cfg.dataset)) + "_" + std::string(to_string(cfg.activation)) + "_" +
           dropout_tag(cfg.dropout) + "_s" + std::to_string(cfg.train.rng_seed);
}

}  // namespace

std::string_view to_string(Method method) { return method == Method::Weights ? "weights" : "spearman"; }

Method parse_method(std::string_view text) {
    if (text == "weights") return Method::Weights;
    if (text == "spearman") return Method::Spearman;
    throw usage_error("unknown method '" + std::string(text) + "' (expected weights or spearman)");
}

MlpArchitecture ExperimentConfig::architecture() const {
    MlpArchitecture arch;
    arch.layer_widths.push_back(kPixelsPerImage);
    arch.layer_widths.insert(arch.layer_widths.end(), hidden_widths.begin(), hidden_widths.end());
    arch.layer_widths.push_back(kClassCount);
    arch.activation = activation;
    arch.dropout_rate = dropout ? 0.5 : 0.0;
    return arch;
}

std::vector<std::string> ExperimentConfig::off_protocol_reasons() const {
    std::vector<std::string> reasons;
    if (spectral.k != kProtocolClusters) reasons.push_back("k=" + std::to_string(spectral.k));
    if (hidden_widths != std::vector<std::size_t>{256, 256, 256, 256}) reasons.push_back("hidden widths");
    if (train.epochs != 20) reasons.push_back("epochs=" + std::to_string(train.epochs));
    if (train.batch_size != 128) reasons.push_back("batch_size=" + std::to_string(train.batch_size));
    return reasons;
}

std::string config_hash(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << std::setprecision(17) << "dataset=" << to_string(cfg.dataset) << ";widths=";
    for (auto w : cfg.architecture().layer_widths) os << w << ',';
    os << ";activation=" << to_string(cfg.activation) << ";dropout=" << cfg.architecture().dropout_rate
       << ";epochs=" << cfg.train.epochs << ";batch=" << cfg.train.batch_size << ";lr=" << cfg.train.adam.lr
       << ";b1=" << cfg.train.adam.beta1 << ";b2=" << cfg.train.adam.beta2 << ";eps=" << cfg.train.adam.eps
       << ";shuffle=" << cfg.train.shuffle_each_epoch << ";seed=" << cfg.train.rng_seed;
    return hex64(fnv1a(os.str()));
}

json to_json(const ExperimentReport& r) {
    json j;
    j["dataset"] = r.dataset;
    j["activation"] = r.activation;
    j["dropout"] = r.dropout;
    j["method"] = r.method;
    j["k"] = r.k;
    j["off_protocol"] = r.off_protocol;
    j["seed"] = r.seed;
    j["spectral_seed"] = r.spectral_seed;
    j["epochs"] = r.epochs;
    j["batch_size"] = r.batch_size;
    j["layer_widths"] = r.layer_widths;
    j["config_hash"] = r.config_hash;
    j["checkpoint"] = r.checkpoint;
    j["test_accuracy"] = r.test_accuracy ? json(*r.test_accuracy) : json(nullptr);
    j["ncut"] = r.ncut;
    j["node_count"] = r.node_count;
    j["cluster_sizes"] = r.cluster_sizes;
    j["layer_composition"] = r.layer_composition;
    j["dropped_nodes"] = r.dropped_nodes;
    j["dropped_by_layer"] = r.dropped_by_layer;
    j["kmeans_cost"] = r.kmeans_cost;
    j["eigenvalues"] = r.eigenvalues;
    j["conventions"] = {{"correlation_rectified", r.correlation_rectified},
                        {"activation_recording", r.activation_recording}};
    j["wall_times"] = {{"load_s", r.wall_times.load_s},
                       {"train_s", r.wall_times.train_s},
                       {"adjacency_s", r.wall_times.adjacency_s},
                       {"cluster_s", r.wall_times.cluster_s}};
    return j;
}

ExperimentReport report_from_json(const json& j) {
    try {
        ExperimentReport r;
        r.dataset = j.at("dataset").get<std::string>();
        r.activation = j.at("activation").get<std::string>();
        r.dropout = j.at("dropout").get<bool>();
        r.method = j.at("method").get<std::string>();
        r.k = j.at("k").get<std::size_t>();
        r.off_protocol = j.at("off_protocol").get<std::vector<std::string>>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.spectral_seed = j.at("spectral_seed").get<std::uint64_t>();
        r.epochs = j.at("epochs").get<std::size_t>();
        r.batch_size = j.at("batch_size").get<std::size_t>();
        r.layer_widths = j.at("layer_widths").get<std::vector<std::size_t>>();
        r.config_hash = j.at("config_hash").get<std::string>();
        r.checkpoint = j.at("checkpoint").get<std::string>();
        if (!j.at("test_accuracy").is_null()) r.test_accuracy = j.at("test_accuracy").get<double>();
        r.ncut = j.at("ncut").get<double>();
        r.node_count = j.at("node_count").get<std::size_t>();
        r.cluster_sizes = j.at("cluster_sizes").get<std::vector<std::size_t>>();
        r.layer_composition = j.at("layer_composition").get<std::vector<std::vector<std::size_t>>>();
        r.dropped_nodes = j.at("dropped_nodes").get<std::size_t>();
        r.dropped_by_layer = j.at("dropped_by_layer").get<std::vector<std::size_t>>();
        r.kmeans_cost = j.at("kmeans_cost").get<double>();
        r.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
        r.correlation_rectified = j.at("conventions").at("correlation_rectified").get<bool>();
        r.activation_recording = j.at("conventions").at("activation_recording").get<std::string>();
        const auto& w = j.at("wall_times");
        r.wall_times = {w.at("load_s").get<double>(), w.at("train_s").get<double>(), w.at("adjacency_s").get<double>(),
                        w.at("cluster_s").get<double>()};
        return r;
    } catch (const json::exception& e) {
        throw data_error(std::string("malformed report JSON: ") + e.what());
    }
}

std::string report_stem(const ExperimentReport& r) {
    return r.dataset + "_" + r.activation + "_" + dropout_tag(r.dropout) + "_" + r.method + "_s" +
           std::to_string(r.seed);
}

fs::path write_report(const fs::path& dir, const ExperimentReport& report) {
    fs::create_directories(dir);
    const auto path = dir / (report_stem(report) + ".json");
    write_text_atomic(path, to_json(report).dump(2) + "\n");
    return path;
}

std::vector<ExperimentReport> load_reports(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw data_error("report directory " + dir.string() + " does not exist");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<ExperimentReport> reports;
    for (const auto& f : files) {
        std::ifstream in(f);
        const json j = json::parse(in, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("ncut") || !j.contains("method")) continue;
        reports.push_back(report_from_json(j));
    }
    return reports;
}

fs::path dataset_dir(const fs::path& data_dir, DatasetName dataset) {
    const auto sub = data_dir / std::string(to_string(dataset));
    return fs::is_directory(sub) ? sub : data_dir;
}

namespace {

fs::path training_summary_path(const fs::path& checkpoint) {
    auto path = checkpoint;
    return path.replace_extension(".train.json");
}

}  // namespace

TrainedModel obtain_model(const ExperimentConfig& cfg, const DatasetSplits& data, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    TrainedModel out;
    out.checkpoint = out_dir / (model_stem(cfg) + "_" + config_hash(cfg) + ".mlpc");
    const auto summary_path = training_summary_path(out.checkpoint);
    const auto start = Clock::now();
    if (fs::exists(out.checkpoint)) {
        out.model = stage("load checkpoint", [&] { return load_checkpoint(out.checkpoint); });
        out.reused = true;
        out.test_accuracy = 100.0 * stage("evaluate", [&] { return accuracy(out.model, data.test); });
        out.train_s = seconds_since(start);
        // keep the original training time when the summary written at training time is available
        std::ifstream in(summary_path);
        const json summary = json::parse(in, nullptr, false);
        if (!summary.is_discarded() && summary.contains("train_s")) out.train_s = summary["train_s"].get<double>();
        return out;
    }
    auto result = stage("train", [&] { return train(data, cfg.architecture(), cfg.train); });
    out.train_s = seconds_since(start);
    out.model = std::move(result.model);
    out.test_accuracy = 100.0 * result.test_accuracy;
    stage("save checkpoint", [&] {
        save_checkpoint(out.checkpoint, out.model);
        const json summary = {{"dataset", to_string(cfg.dataset)},
                              {"activation", to_string(cfg.activation)},
                              {"dropout", cfg.dropout},
                              {"epochs", cfg.train.epochs},
                              {"batch_size", cfg.train.batch_size},
                              {"seed", cfg.train.rng_seed},
                              {"config_hash", config_hash(cfg)},
                              {"checkpoint", out.checkpoint.filename().string()},
                              {"test_accuracy", out.test_accuracy},
                              {"train_s", out.train_s},
                              {"epoch_losses", result.epoch_losses}};
        write_text_atomic(summary_path, summary.dump(2) + "\n");
        return 0;
    });
    return out;
}

ExperimentReport analyze_model(const MlpModel& model, Method method, const SpectralConfig& spectral,
                               const LabeledImageSet* test) {
    ExperimentReport r;
    r.activation = std::string(to_string(model.arch.activation));
    r.dropout = model.arch.dropout_rate > 0.0;
    r.method = std::string(to_string(method));
    r.k = spectral.k;
    r.spectral_seed = spectral.rng_seed;
    r.layer_widths = model.arch.layer_widths;
    r.correlation_rectified = true;

    auto start = Clock::now();
    const AdjacencyMatrix adjacency = stage("adjacency", [&] {
        if (method == Method::Weights) return build_weight_adjacency(model.weights, model.arch.layer_widths);
        if (!test) throw usage_error("the spearman method needs the test split (pass a data directory)");
        return build_correlation_adjacency(record_activations(model, test->images), model.arch);
    });
    r.wall_times.adjacency_s = seconds_since(start);

    start = Clock::now();
    const ClusterResult clusters = stage("cluster", [&] { return cluster_graph(adjacency, spectral); });
    r.wall_times.cluster_s = seconds_since(start);

    const NeuronLayout layout(model.arch.layer_widths);
    r.node_count = layout.node_count();
    r.ncut = clusters.ncut;
    r.cluster_sizes = clusters.partition.cluster_sizes();
    r.layer_composition.assign(spectral.k, std::vector<std::size_t>(layout.layer_count(), 0));
    for (std::size_t i = 0; i < clusters.kept_nodes.size(); ++i) {
        ++r.layer_composition[clusters.partition.label(i)][layout.layer_of(clusters.kept_nodes[i])];
    }
    r.dropped_nodes = clusters.dropped_nodes.size();
    r.dropped_by_layer.assign(layout.layer_count(), 0);
    for (auto node : clusters.dropped_nodes) ++r.dropped_by_layer[layout.layer_of(node)];
    r.kmeans_cost = clusters.kmeans_cost;
    r.eigenvalues.assign(clusters.eigenvalues.data(), clusters.eigenvalues.data() + clusters.eigenvalues.size());
    return r;
}

namespace {

void fill_config_echo(ExperimentReport& r, const ExperimentConfig& cfg, const TrainedModel& trained) {
    r.dataset = std::string(to_string(cfg.dataset));
    r.off_protocol = cfg.off_protocol_reasons();
    r.seed = cfg.train.rng_seed;
    r.epochs = cfg.train.epochs;
    r.batch_size = cfg.train.batch_size;
    r.config_hash = config_hash(cfg);
    r.checkpoint = trained.checkpoint.filename().string();
    r.test_accuracy = trained.test_accuracy;
    r.wall_times.train_s = trained.train_s;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg, const fs::path& data_dir, const fs::path& out_dir) {
    cfg.spectral.validate();
    auto start = Clock::now();
    const DatasetSplits data = stage("load data", [&] { return load_dataset(cfg.dataset, dataset_dir(data_dir, cfg.dataset)); });
    const double load_s = seconds_since(start);

    const TrainedModel trained = obtain_model(cfg, data, out_dir);
    ExperimentReport r = analyze_model(trained.model, cfg.method, cfg.spectral, &data.test);
    fill_config_echo(r, cfg, trained);
    r.wall_times.load_s = load_s;
    stage("write report", [&] { return write_report(out_dir, r); });
    return r;
}

ExperimentReport analyze_checkpoint(const fs::path& checkpoint, Method method, const SpectralConfig& spectral,
                                    const LabeledImageSet* test) {
    spectral.validate();
    if (method == Method::Spearman && !test) {
        throw usage_error("the spearman method needs the test split of the training dataset (pass --data-dir)");
    }
    const MlpModel model = stage("load checkpoint", [&] { return load_checkpoint(checkpoint); });
    ExperimentReport r = analyze_model(model, method, spectral, test);
    r.dataset = test ? "custom" : "unknown";
    r.checkpoint = checkpoint.filename().string();
    if (spectral.k != kProtocolClusters) r.off_protocol.push_back("k=" + std::to_string(spectral.k));
    if (test) r.test_accuracy = 100.0 * stage("evaluate", [&] { return accuracy(model, *test); });
    return r;
}

GridResult run_grid(const GridConfig& grid, const fs::path& data_dir, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    GridResult result;
    for (const auto dataset : grid.datasets) {
        std::optional<DatasetSplits> data;
        double load_s = 0.0;
        try {
            const auto start = Clock::now();
            data = stage("load data", [&] { return load_dataset(dataset, dataset_dir(data_dir, dataset)); });
            load_s = seconds_since(start);
        } catch (const Error& e) {
            result.failures.push_back({std::string(to_string(dataset)), e.what()});
            continue;
        }
        for (const bool dropout : {false, true}) {
            for (const auto activation : {Activation::ReLU, Activation::Sigmoid}) {
                for (const auto seed : grid.seeds) {
                    ExperimentConfig cfg = grid.base;
                    cfg.dataset = dataset;
                    cfg.activation = activation;
                    cfg.dropout = dropout;
                    cfg.train.rng_seed = seed;
                    cfg.spectral.rng_seed = seed;
                    const std::string job = model_stem(cfg);
                    std::optional<TrainedModel> trained;
                    try {
                        trained = obtain_model(cfg, *data, out_dir);
                    } catch (const Error& e) {
                        result.failures.push_back({job, e.what()});
                        continue;
                    }
                    for (const auto method : {Method::Weights, Method::Spearman}) {
                        try {
                            ExperimentReport r = analyze_model(trained->model, method, cfg.spectral, &data->test);
                            cfg.method = method;
                            fill_config_echo(r, cfg, *trained);
                            r.wall_times.load_s = load_s;
                            write_report(out_dir, r);
                            result.reports.push_back(std::move(r));
                        } catch (const Error& e) {
                            result.failures.push_back({job + "_" + std::string(to_string(method)), e.what()});
                        }
                    }
                }
            }
        }
    }
    result.tables = render_tables(result.reports);
    write_text_atomic(out_dir / "table_weights.txt", result.tables.weights_text);
    write_text_atomic(out_dir / "table_spearman.txt", result.tables.spearman_text);
    write_text_atomic(out_dir / "grid.csv", result.tables.csv);
    write_text_atomic(out_dir / "claims.txt", result.tables.claims_text);
    write_text_atomic(out_dir / "claims.json", result.tables.claims.dump(2) + "\n");
    return result;
}

namespace {

struct CellKey {
    std::string method;
    int dataset_rank;
    std::string dataset;
    bool dropout;
    int activation_rank;
    std::string activation;

    auto tie() const { return std::tie(method, dataset_rank, dataset, dropout, activation_rank, activation); }
    bool operator<(const CellKey& o) const { return tie() < o.tie(); }
};

struct CellValues {
    std::map<std::uint64_t, std::pair<std::optional<double>, double>> by_seed;  // seed -> (accuracy, ncut)

    double mean_ncut() const {
        double s = 0.0;
        for (const auto& [seed, v] : by_seed) s += v.second;
        return s / static_cast<double>(by_seed.size());
    }
    std::optional<double> mean_accuracy() const {
        double s = 0.0;
        for (const auto& [seed, v] : by_seed) {
            if (!v.first) return std::nullopt;
            s += *v.first;
        }
        return s / static_cast<double>(by_seed.size());
    }
};

int dataset_rank(const std::string& d) { return d == "mnist" ? 0 : d == "fashion_mnist" ? 1 : 2; }

std::string dataset_label(const std::string& d) {
    if (d == "mnist") return "MNIST";
    if (d == "fashion_mnist") return "FashionMNIST";
    return d;
}

std::string activation_label(const std::string& a) { return a == "relu" ? "ReLU" : a == "sigmoid" ? "Sigmoid" : a; }

std::string fixed(double v, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

std::string render_aligned(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths(rows.front().size(), 0);
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
    }
    std::ostringstream os;
    auto rule = [&] {
        os << '+';
        for (auto w : widths) os << std::string(w + 2, '-') << '+';
        os << '\n';
    };
    rule();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        os << '|';
        for (std::size_t c = 0; c < rows[r].size(); ++c) os << ' ' << std::left << std::setw(static_cast<int>(widths[c])) << rows[r][c] << " |";
        os << '\n';
        if (r == 0) rule();
    }
    rule();
    return os.str();
}

}  // namespace

GridTables render_tables(const std::vector<ExperimentReport>& reports) {
    std::map<CellKey, CellValues> cells;
    std::set<std::uint64_t> seeds;
    for (const auto& r : reports) {
        CellKey key{r.method, dataset_rank(r.dataset), r.dataset, r.dropout, r.activation == "relu" ? 0 : 1, r.activation};
        cells[key].by_seed[r.seed] = {r.test_accuracy, r.ncut};
        seeds.insert(r.seed);
    }

    GridTables out;
    std::ostringstream csv;
    csv << std::setprecision(17);
    csv << "method,dataset,activation,dropout,seed,test_accuracy,ncut\n";
    for (const std::string method : {"weights", "spearman"}) {
        std::vector<std::vector<std::string>> rows = {
            {"Data Set", "Activation Function", "Dropout", "Test Accuracy(%)", "N-Cut"}};
        for (const auto& [key, values] : cells) {
            if (key.method != method) continue;
            const auto acc = values.mean_accuracy();
            rows.push_back({dataset_label(key.dataset), activation_label(key.activation), key.dropout ? "Yes" : "No",
                            acc ? fixed(*acc, 1) : "-", fixed(values.mean_ncut(), 2)});
            for (const auto& [seed, v] : values.by_seed) {
                csv << method << ',' << key.dataset << ',' << key.activation << ',' << (key.dropout ? "yes" : "no") << ','
                    << seed << ',' << (v.first ? std::to_string(*v.first) : "") << ',' << v.second << '\n';
            }
            csv << method << ',' << key.dataset << ',' << key.activation << ',' << (key.dropout ? "yes" : "no")
                << ",mean," << (acc ? std::to_string(*acc) : "") << ',' << values.mean_ncut() << '\n';
        }
        const std::string caption = method == "weights" ? "Method 1: |trained weight| adjacency\n"
                                                        : "Method 2: |Spearman correlation| adjacency\n";
        (method == "weights" ? out.weights_text : out.spearman_text) =
            caption + (rows.size() > 1 ? render_aligned(rows) : std::string("(no reports)\n"));
    }
    out.csv = csv.str();

    // Claim checks. "ordering": within (method, dataset, dropout), sigmoid ncut < relu ncut.
    // "dropout": within (method, dataset, activation), dropout ncut < no-dropout ncut.
    auto find = [&](const std::string& method, const std::string& dataset, bool dropout,
                    const std::string& activation) -> const CellValues* {
        CellKey key{method, dataset_rank(dataset), dataset, dropout, activation == "relu" ? 0 : 1, activation};
        auto it = cells.find(key);
        return it == cells.end() ? nullptr : &it->second;
    };
    std::set<std::pair<std::string, std::string>> method_dataset;
    for (const auto& [key, v] : cells) method_dataset.insert({key.method, key.dataset});

    auto evaluate = [&](std::optional<std::uint64_t> seed) {
        json ordering = json::array();
        json dropout_claim = json::array();
        int ordering_holds = 0;
        int dropout_holds = 0;
        auto ncut_of = [&](const CellValues* c) -> std::optional<double> {
            if (!c) return std::nullopt;
            if (!seed) return c->mean_ncut();
            auto it = c->by_seed.find(*seed);
            if (it == c->by_seed.end()) return std::nullopt;
            return it->second.second;
        };
        for (const auto& [method, dataset] : method_dataset) {
            for (const bool dropout : {false, true}) {
                const auto relu = ncut_of(find(method, dataset, dropout, "relu"));
                const auto sigmoid = ncut_of(find(method, dataset, dropout, "sigmoid"));
                if (!relu || !sigmoid) continue;
                const bool holds = *sigmoid < *relu;
                ordering_holds += holds;
                ordering.push_back({{"method", method}, {"dataset", dataset}, {"dropout", dropout},
                                    {"relu_ncut", *relu}, {"sigmoid_ncut", *sigmoid}, {"holds", holds}});
            }
            for (const std::string activation : {"relu", "sigmoid"}) {
                const auto without = ncut_of(find(method, dataset, false, activation));
                const auto with = ncut_of(find(method, dataset, true, activation));
                if (!without || !with) continue;
                const bool holds = *with < *without;
                dropout_holds += holds;
                dropout_claim.push_back({{"method", method}, {"dataset", dataset}, {"activation", activation},
                                         {"no_dropout_ncut", *without}, {"dropout_ncut", *with}, {"holds", holds}});
            }
        }
        return json{{"sigmoid_below_relu", {{"holds", ordering_holds}, {"cells", ordering.size()}, {"detail", ordering}}},
                    {"dropout_lowers_ncut",
                     {{"holds", dropout_holds}, {"cells", dropout_claim.size()}, {"detail", dropout_claim}}}};
    };

    std::ostringstream claims;
    out.claims["per_seed"] = json::object();
    for (const auto seed : seeds) {
        const json c = evaluate(seed);
        out.claims["per_seed"][std::to_string(seed)] = c;
        claims << "seed " << seed << ": sigmoid ncut < relu ncut in " << c["sigmoid_below_relu"]["holds"] << "/"
               << c["sigmoid_below_relu"]["cells"] << " cells; dropout lowers ncut in "
               << c["dropout_lowers_ncut"]["holds"] << "/" << c["dropout_lowers_ncut"]["cells"] << " cells\n";
    }
    const json mean = evaluate(std::nullopt);
    out.claims["mean"] = mean;
    claims << "mean over " << seeds.size() << " seed(s): sigmoid ncut < relu ncut in " << mean["sigmoid_below_relu"]["holds"]
           << "/" << mean["sigmoid_below_relu"]["cells"] << " cells; dropout lowers ncut in "
           << mean["dropout_lowers_ncut"]["holds"] << "/" << mean["dropout_lowers_ncut"]["cells"] << " cells\n";
    out.claims_text = claims.str();
    return out;
}

}  // namespace modnet
