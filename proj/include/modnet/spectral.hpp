#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "modnet/graph_core.hpp"

namespace modnet {

struct SpectralConfig {
    std::size_t k = 4;
    std::size_t kmeans_restarts = 10;
    std::size_t kmeans_max_iters = 300;
    double kmeans_tol = 1e-8;
    double eig_tol = 1e-9;
    std::uint64_t rng_seed = 0;

    /// Throws a Usage error when k < 2, restarts == 0 or a tolerance is not positive.
    void validate() const;
};

/// Row-per-node spectral coordinates plus the eigenpairs they came from.
struct SpectralEmbedding {
    Eigen::MatrixXd rows;          // n x k
    Eigen::VectorXd eigenvalues;   // ascending, size k
    std::vector<double> residuals; // ||L v - lambda v||_2 per eigenpair
    std::vector<bool> zero_rows;   // set by row_normalize

    std::size_t n() const { return static_cast<std::size_t>(rows.rows()); }
    std::size_t k() const { return static_cast<std::size_t>(rows.cols()); }
};

/// L_sym = I - D^{-1/2} A D^{-1/2}. Every node must have positive degree.
Eigen::MatrixXd normalized_laplacian(const AdjacencyMatrix& a);

/// Eigenvectors of the k algebraically smallest eigenvalues of a symmetric matrix.
///
/// Uses a dense symmetric eigendecomposition. Each returned pair is checked
/// against ||L v - lambda v|| <= eig_tol * max(1, ||L||_F); a violation raises a
/// Numerical error listing the residuals.
SpectralEmbedding smallest_eigenvectors(const Eigen::MatrixXd& laplacian, std::size_t k, double eig_tol);

/// Scales each row to unit Euclidean norm. All-zero rows stay zero and are flagged.
SpectralEmbedding row_normalize(SpectralEmbedding embedding);

struct KMeansRestart {
    Partition partition;
    double cost = 0.0;
    std::vector<double> cost_history;  // cost after every Lloyd iteration
    std::size_t repairs = 0;           // empty clusters reseeded
};

struct KMeansResult {
    Partition partition;
    double cost = 0.0;
    std::size_t best_restart = 0;
    std::vector<KMeansRestart> restarts;
};

/// k-means++ seeded Lloyd iterations over the embedding rows, best of
/// cfg.kmeans_restarts by within-cluster sum of squares (ties go to the
/// earlier restart). Restart r draws from derive_seed(cfg.rng_seed, r).
KMeansResult kmeans(const Eigen::MatrixXd& points, const SpectralConfig& cfg);

struct ClusterResult {
    Partition partition;                    // over kept_nodes, in order
    std::vector<std::size_t> kept_nodes;    // original indices with degree > 0
    std::vector<std::size_t> dropped_nodes; // original indices with degree 0
    double ncut = 0.0;
    double kmeans_cost = 0.0;
    Eigen::VectorXd eigenvalues;
    std::vector<double> residuals;

    /// Cluster label per original node, -1 for dropped nodes.
    std::vector<long> labels_by_node(std::size_t node_count) const;
};

/// Normalized spectral clustering into cfg.k clusters and the resulting ncut.
/// Zero-degree nodes are removed first and reported in dropped_nodes.
ClusterResult cluster_graph(const AdjacencyMatrix& a, const SpectralConfig& cfg);

}  // namespace modnet
