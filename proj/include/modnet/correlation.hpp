#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "modnet/graph_core.hpp"
#include "modnet/mlp.hpp"

namespace modnet {

/// Ascending ranks starting at 1; tied values share the mean of the ranks they span.
using RankVector = std::vector<double>;

RankVector rank_transform(std::span<const double> x);

/// Spearman rank correlation: Pearson correlation of the two rank vectors.
/// Returns 0 when either input is constant.
double spearman(std::span<const double> x, std::span<const double> y);

/// Column-wise ranks, centered and scaled to unit norm, so that the dot product
/// of two columns is their Spearman correlation. Constant columns become zero.
Eigen::MatrixXd standardized_ranks(const Eigen::MatrixXd& columns);

/// Method-2 graph: every edge of the architecture gets weight
/// |spearman(activations of its two endpoints)|; non-edges stay 0.
AdjacencyMatrix build_correlation_adjacency(const ActivationTable& table, const MlpArchitecture& arch);

}  // namespace modnet
