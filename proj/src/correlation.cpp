#include "modnet/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "modnet/error.hpp"

namespace modnet {

namespace {

template <typename Get>
void rank_into(std::size_t m, Get value, double* ranks) {
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
    std::size_t i = 0;
    while (i < m) {
        std::size_t j = i + 1;
        while (j < m && value(order[j]) == value(order[i])) ++j;
        // positions i..j-1 hold ranks i+1..j
        const double avg = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t p = i; p < j; ++p) ranks[order[p]] = avg;
        i = j;
    }
}

}  // namespace

RankVector rank_transform(std::span<const double> x) {
    if (x.size() < 2) throw usage_error("rank transform needs at least 2 values, got " + std::to_string(x.size()));
    for (double v : x) {
        if (!std::isfinite(v)) throw data_error("rank transform input contains a non-finite value");
    }
    RankVector ranks(x.size());
    rank_into(x.size(), [&](std::size_t i) { return x[i]; }, ranks.data());
    return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw usage_error("spearman inputs differ in length (" + std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()) + ")");
    }
    const auto rx = rank_transform(x);
    const auto ry = rank_transform(y);
    const double mean = 0.5 * static_cast<double>(x.size() + 1);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double dx = rx[i] - mean;
        const double dy = ry[i] - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

Eigen::MatrixXd standardized_ranks(const Eigen::MatrixXd& columns) {
    const Eigen::Index m = columns.rows();
    if (m < 2) throw usage_error("need at least 2 observations per column, got " + std::to_string(m));
    if (!columns.allFinite()) throw data_error("activation table contains non-finite values");
    Eigen::MatrixXd z(m, columns.cols());
    const double mean = 0.5 * static_cast<double>(m + 1);
    for (Eigen::Index c = 0; c < columns.cols(); ++c) {
        const double* col = columns.col(c).data();
        double* out = z.col(c).data();
        rank_into(static_cast<std::size_t>(m), [col](std::size_t i) { return col[i]; }, out);
        z.col(c).array() -= mean;
        const double norm = z.col(c).norm();
        if (norm > 0.0) {
            z.col(c) /= norm;
        } else {
            z.col(c).setZero();
        }
    }
    return z;
}

AdjacencyMatrix build_correlation_adjacency(const ActivationTable& table, const MlpArchitecture& arch) {
    arch.validate();
    if (table.n() != arch.neuron_count()) {
        throw data_error("activation table has " + std::to_string(table.n()) + " neuron columns, architecture has " +
                         std::to_string(arch.neuron_count()) + " neurons");
    }
    const NeuronLayout layout(arch.layer_widths);
    const Eigen::MatrixXd z = standardized_ranks(table.values);
    const auto n = static_cast<Eigen::Index>(layout.node_count());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t t = 0; t + 1 < layout.layer_count(); ++t) {
        const auto src = static_cast<Eigen::Index>(layout.layer_begin(t));
        const auto dst = static_cast<Eigen::Index>(layout.layer_begin(t + 1));
        const auto ws = static_cast<Eigen::Index>(layout.width(t));
        const auto wd = static_cast<Eigen::Index>(layout.width(t + 1));
        const Eigen::MatrixXd block =
            (z.middleCols(dst, wd).transpose() * z.middleCols(src, ws)).cwiseAbs().cwiseMin(1.0);
        a.block(dst, src, wd, ws) = block;
        a.block(src, dst, ws, wd) = block.transpose();
    }
    return AdjacencyMatrix(std::move(a));
}

}  // namespace modnet
