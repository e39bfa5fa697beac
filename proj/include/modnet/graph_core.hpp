#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace modnet {

/// Maps (layer, offset) neuron coordinates to a dense global index.
///
/// Neurons are numbered layer by layer starting with the input layer, so the
/// global indices of an architecture with widths w_0..w_L form the contiguous
/// range [0, sum w_t). Indices are 0-based throughout the library.
class NeuronLayout {
public:
    explicit NeuronLayout(std::vector<std::size_t> layer_widths);

    std::size_t layer_count() const { return widths_.size(); }
    std::size_t width(std::size_t layer) const { return widths_.at(layer); }
    const std::vector<std::size_t>& widths() const { return widths_; }
    std::size_t node_count() const { return offsets_.back(); }

    /// Global index of the first neuron of `layer`.
    std::size_t layer_begin(std::size_t layer) const { return offsets_.at(layer); }
    std::size_t global_index(std::size_t layer, std::size_t offset) const;
    std::size_t layer_of(std::size_t global) const;

    /// True when the two neurons sit in consecutive layers.
    bool adjacent(std::size_t a, std::size_t b) const;

private:
    std::vector<std::size_t> widths_;
    std::vector<std::size_t> offsets_;  // prefix sums, size layer_count()+1
};

/// Symmetric, nonnegative, zero-diagonal edge-weight matrix of a network graph.
class AdjacencyMatrix {
public:
    AdjacencyMatrix() = default;

    /// Validates the matrix invariants; throws a Data error naming the first violation.
    explicit AdjacencyMatrix(Eigen::MatrixXd entries);

    static AdjacencyMatrix zeros(std::size_t n);

    std::size_t size() const { return static_cast<std::size_t>(entries_.rows()); }
    double operator()(std::size_t i, std::size_t j) const {
        return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    const Eigen::MatrixXd& entries() const { return entries_; }

    /// Subgraph induced by `nodes`, in the given order.
    AdjacencyMatrix induced(std::span<const std::size_t> nodes) const;

private:
    Eigen::MatrixXd entries_;
};

/// Assignment of n nodes to k disjoint, nonempty clusters labelled 0..k-1.
class Partition {
public:
    Partition() = default;
    Partition(std::size_t k, std::vector<std::size_t> labels);

    std::size_t k() const { return k_; }
    std::size_t size() const { return labels_.size(); }
    std::size_t label(std::size_t node) const { return labels_.at(node); }
    const std::vector<std::size_t>& labels() const { return labels_; }

    std::vector<std::size_t> members(std::size_t cluster) const;
    std::vector<std::size_t> cluster_sizes() const;

    friend bool operator==(const Partition&, const Partition&) = default;

private:
    std::size_t k_ = 0;
    std::vector<std::size_t> labels_;
};

/// Builds A with A[i][j] = |w_ij| for every edge between consecutive layers.
/// `layer_weights[t]` has shape (width[t+1] x width[t]); biases never enter the graph.
AdjacencyMatrix build_weight_adjacency(std::span<const Eigen::MatrixXd> layer_weights,
                                       std::span<const std::size_t> layer_widths);

double degree(const AdjacencyMatrix& a, std::size_t node);
Eigen::VectorXd degrees(const AdjacencyMatrix& a);

/// Sum of degrees over a nonempty node set.
double volume(const AdjacencyMatrix& a, std::span<const std::size_t> cluster);

/// W(X, Y) = sum over i in X, j in Y of A[i][j].
double cut_weight(const AdjacencyMatrix& a, std::span<const std::size_t> x,
                  std::span<const std::size_t> y);

/// Normalized cut: sum_i W(X_i, complement X_i) / vol(X_i).
/// Throws a Numerical error naming the cluster when some vol(X_i) is zero.
double ncut(const AdjacencyMatrix& a, const Partition& p);

}  // namespace modnet
