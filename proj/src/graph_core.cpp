#include "modnet/graph_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "modnet/error.hpp"

namespace modnet {

namespace {

void check_node(std::size_t node, std::size_t n) {
    if (node >= n) {
        throw usage_error("node index " + std::to_string(node) + " out of range for a " +
                          std::to_string(n) + "-node graph");
    }
}

void check_nodes(std::span<const std::size_t> nodes, std::size_t n) {
    for (auto node : nodes) check_node(node, n);
}

}  // namespace

NeuronLayout::NeuronLayout(std::vector<std::size_t> layer_widths) : widths_(std::move(layer_widths)) {
    if (widths_.empty()) throw usage_error("layout needs at least one layer");
    offsets_.resize(widths_.size() + 1, 0);
    for (std::size_t t = 0; t < widths_.size(); ++t) {
        if (widths_[t] == 0) throw usage_error("layer " + std::to_string(t) + " has width 0");
        offsets_[t + 1] = offsets_[t] + widths_[t];
    }
}

std::size_t NeuronLayout::global_index(std::size_t layer, std::size_t offset) const {
    if (layer >= widths_.size() || offset >= widths_[layer]) {
        throw usage_error("neuron (" + std::to_string(layer) + ", " + std::to_string(offset) +
                          ") outside the layout");
    }
    return offsets_[layer] + offset;
}

std::size_t NeuronLayout::layer_of(std::size_t global) const {
    check_node(global, node_count());
    auto it = std::upper_bound(offsets_.begin(), offsets_.end(), global);
    return static_cast<std::size_t>(it - offsets_.begin()) - 1;
}

bool NeuronLayout::adjacent(std::size_t a, std::size_t b) const {
    const auto la = layer_of(a);
    const auto lb = layer_of(b);
    return la + 1 == lb || lb + 1 == la;
}

AdjacencyMatrix::AdjacencyMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) {
        std::ostringstream os;
        os << "adjacency matrix must be square, got " << entries_.rows() << "x" << entries_.cols();
        throw data_error(os.str());
    }
    const Eigen::Index n = entries_.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double v = entries_(i, j);
            if (!std::isfinite(v) || v < 0.0) {
                std::ostringstream os;
                os << "adjacency entry (" << i << ", " << j << ") = " << v << " is not a finite nonnegative weight";
                throw data_error(os.str());
            }
            if (v != entries_(j, i)) {
                std::ostringstream os;
                os << "adjacency matrix is not symmetric at (" << i << ", " << j << ")";
                throw data_error(os.str());
            }
        }
        if (entries_(j, j) != 0.0) {
            throw data_error("adjacency matrix has a self-loop at node " + std::to_string(j));
        }
    }
}

AdjacencyMatrix AdjacencyMatrix::zeros(std::size_t n) {
    const auto m = static_cast<Eigen::Index>(n);
    return AdjacencyMatrix(Eigen::MatrixXd::Zero(m, m));
}

AdjacencyMatrix AdjacencyMatrix::induced(std::span<const std::size_t> nodes) const {
    check_nodes(nodes, size());
    const auto m = static_cast<Eigen::Index>(nodes.size());
    Eigen::MatrixXd sub(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i < m; ++i) {
            sub(i, j) = entries_(static_cast<Eigen::Index>(nodes[i]), static_cast<Eigen::Index>(nodes[j]));
        }
    }
    AdjacencyMatrix out;
    out.entries_ = std::move(sub);
    return out;
}

Partition::Partition(std::size_t k, std::vector<std::size_t> labels) : k_(k), labels_(std::move(labels)) {
    if (k_ == 0) throw usage_error("partition needs at least one cluster");
    std::vector<std::size_t> counts(k_, 0);
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] >= k_) {
            throw usage_error("node " + std::to_string(i) + " has label " + std::to_string(labels_[i]) +
                              " outside 0.." + std::to_string(k_ - 1));
        }
        ++counts[labels_[i]];
    }
    for (std::size_t c = 0; c < k_; ++c) {
        if (counts[c] == 0) throw usage_error("cluster " + std::to_string(c) + " is empty");
    }
}

std::vector<std::size_t> Partition::members(std::size_t cluster) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] == cluster) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> Partition::cluster_sizes() const {
    std::vector<std::size_t> counts(k_, 0);
    for (auto l : labels_) ++counts[l];
    return counts;
}

AdjacencyMatrix build_weight_adjacency(std::span<const Eigen::MatrixXd> layer_weights,
                                       std::span<const std::size_t> layer_widths) {
    if (layer_widths.size() < 2) throw data_error("need at least two layers to build a graph");
    if (layer_weights.size() + 1 != layer_widths.size()) {
        throw data_error("got " + std::to_string(layer_weights.size()) + " weight matrices for " +
                         std::to_string(layer_widths.size()) + " layers (expected " +
                         std::to_string(layer_widths.size() - 1) + ")");
    }
    NeuronLayout layout({layer_widths.begin(), layer_widths.end()});
    for (std::size_t t = 0; t < layer_weights.size(); ++t) {
        const auto& w = layer_weights[t];
        if (static_cast<std::size_t>(w.rows()) != layer_widths[t + 1] ||
            static_cast<std::size_t>(w.cols()) != layer_widths[t]) {
            std::ostringstream os;
            os << "weight matrix " << t << " is " << w.rows() << "x" << w.cols() << ", expected "
               << layer_widths[t + 1] << "x" << layer_widths[t];
            throw data_error(os.str());
        }
    }

    const auto n = static_cast<Eigen::Index>(layout.node_count());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t t = 0; t < layer_weights.size(); ++t) {
        const auto src = static_cast<Eigen::Index>(layout.layer_begin(t));
        const auto dst = static_cast<Eigen::Index>(layout.layer_begin(t + 1));
        const Eigen::MatrixXd block = layer_weights[t].cwiseAbs();
        a.block(dst, src, block.rows(), block.cols()) = block;
        a.block(src, dst, block.cols(), block.rows()) = block.transpose();
    }
    return AdjacencyMatrix(std::move(a));
}

double degree(const AdjacencyMatrix& a, std::size_t node) {
    check_node(node, a.size());
    return a.entries().col(static_cast<Eigen::Index>(node)).sum();
}

Eigen::VectorXd degrees(const AdjacencyMatrix& a) { return a.entries().colwise().sum().transpose(); }

double volume(const AdjacencyMatrix& a, std::span<const std::size_t> cluster) {
    if (cluster.empty()) throw usage_error("volume of an empty cluster is undefined");
    check_nodes(cluster, a.size());
    double vol = 0.0;
    for (auto i : cluster) vol += degree(a, i);
    return vol;
}

double cut_weight(const AdjacencyMatrix& a, std::span<const std::size_t> x, std::span<const std::size_t> y) {
    check_nodes(x, a.size());
    check_nodes(y, a.size());
    double w = 0.0;
    for (auto i : x) {
        for (auto j : y) w += a(i, j);
    }
    return w;
}

double ncut(const AdjacencyMatrix& a, const Partition& p) {
    if (p.size() != a.size()) {
        throw usage_error("partition covers " + std::to_string(p.size()) + " nodes but the graph has " +
                          std::to_string(a.size()));
    }
    const std::size_t n = a.size();
    const auto& labels = p.labels();
    std::vector<double> vol(p.k(), 0.0);
    std::vector<double> crossing(p.k(), 0.0);
    const auto& m = a.entries();
    for (std::size_t j = 0; j < n; ++j) {
        const auto lj = labels[j];
        const double* col = m.col(static_cast<Eigen::Index>(j)).data();
        double deg = 0.0;
        double out = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            deg += col[i];
            if (labels[i] != lj) out += col[i];
        }
        vol[lj] += deg;
        crossing[lj] += out;
    }
    double total = 0.0;
    for (std::size_t c = 0; c < p.k(); ++c) {
        if (!(vol[c] > 0.0)) {
            throw numerical_error("ncut undefined: cluster " + std::to_string(c) + " (" +
                                  std::to_string(p.members(c).size()) + " nodes) has zero volume");
        }
        total += crossing[c] / vol[c];
    }
    return total;
}

}  // namespace modnet
