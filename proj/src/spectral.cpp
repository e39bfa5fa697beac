#include "modnet/spectral.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "modnet/error.hpp"
#include "modnet/rng.hpp"

namespace modnet {

void SpectralConfig::validate() const {
    if (k < 2) throw usage_error("spectral clustering needs k >= 2, got " + std::to_string(k));
    if (kmeans_restarts < 1) throw usage_error("k-means needs at least one restart");
    if (kmeans_max_iters < 1) throw usage_error("k-means needs at least one iteration");
    if (!(kmeans_tol > 0.0) || !(eig_tol > 0.0)) throw usage_error("tolerances must be positive");
}

Eigen::MatrixXd normalized_laplacian(const AdjacencyMatrix& a) {
    const Eigen::VectorXd deg = degrees(a);
    const Eigen::Index n = deg.size();
    Eigen::VectorXd inv_sqrt(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(deg(i) > 0.0)) {
            throw numerical_error("normalized Laplacian undefined: node " + std::to_string(i) + " has degree 0");
        }
        inv_sqrt(i) = 1.0 / std::sqrt(deg(i));
    }
    const auto& m = a.entries();
    Eigen::MatrixXd lap(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            // scale factor formed first so that (i, j) and (j, i) round identically
            lap(i, j) = -m(i, j) * (inv_sqrt(i) * inv_sqrt(j));
        }
        lap(j, j) += 1.0;
    }
    return lap;
}

SpectralEmbedding smallest_eigenvectors(const Eigen::MatrixXd& laplacian, std::size_t k, double eig_tol) {
    const Eigen::Index n = laplacian.rows();
    if (laplacian.cols() != n) throw usage_error("eigensolver input must be square");
    if (k == 0 || k > static_cast<std::size_t>(n)) {
        throw usage_error("requested " + std::to_string(k) + " eigenvectors of a " + std::to_string(n) + "x" +
                          std::to_string(n) + " matrix");
    }
    const double asym = (laplacian - laplacian.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-9) {
        std::ostringstream os;
        os << "eigensolver input is not symmetric (max |L - L^T| = " << asym << ")";
        throw usage_error(os.str());
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
    if (solver.info() != Eigen::Success) throw numerical_error("symmetric eigensolver did not converge");

    const auto kk = static_cast<Eigen::Index>(k);
    SpectralEmbedding out;
    out.rows = solver.eigenvectors().leftCols(kk);
    out.eigenvalues = solver.eigenvalues().head(kk);

    const double bound = eig_tol * std::max(1.0, laplacian.norm());
    bool ok = true;
    for (Eigen::Index c = 0; c < kk; ++c) {
        const double r = (laplacian * out.rows.col(c) - out.eigenvalues(c) * out.rows.col(c)).norm();
        out.residuals.push_back(r);
        ok = ok && r <= bound;
    }
    if (!ok) {
        std::ostringstream os;
        os << "eigenpair residuals exceed " << bound << ":";
        for (double r : out.residuals) os << ' ' << r;
        throw numerical_error(os.str());
    }
    return out;
}

SpectralEmbedding row_normalize(SpectralEmbedding embedding) {
    const Eigen::Index n = embedding.rows.rows();
    embedding.zero_rows.assign(static_cast<std::size_t>(n), false);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double norm = embedding.rows.row(i).norm();
        if (norm > 0.0) {
            embedding.rows.row(i) /= norm;
        } else {
            embedding.zero_rows[static_cast<std::size_t>(i)] = true;
        }
    }
    return embedding;
}

namespace {

double squared_distance(const Eigen::MatrixXd& points, Eigen::Index i, const Eigen::MatrixXd& centers,
                        Eigen::Index c) {
    return (points.row(i) - centers.row(c)).squaredNorm();
}

Eigen::MatrixXd seed_plus_plus(const Eigen::MatrixXd& points, std::size_t k, Rng& rng) {
    const Eigen::Index n = points.rows();
    Eigen::MatrixXd centers(static_cast<Eigen::Index>(k), points.cols());
    centers.row(0) = points.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
    std::vector<double> d2(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) d2[i] = squared_distance(points, i, centers, 0);

    for (Eigen::Index c = 1; c < static_cast<Eigen::Index>(k); ++c) {
        double total = 0.0;
        for (double d : d2) total += d;
        Eigen::Index pick = n - 1;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            Eigen::Index last_positive = 0;
            bool found = false;
            for (Eigen::Index i = 0; i < n && !found; ++i) {
                if (d2[i] <= 0.0) continue;
                last_positive = i;
                acc += d2[i];
                found = acc > target;
            }
            pick = last_positive;
        } else {
            pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
        }
        centers.row(c) = points.row(pick);
        for (Eigen::Index i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points, i, centers, c));
    }
    return centers;
}

KMeansRestart lloyd(const Eigen::MatrixXd& points, Eigen::MatrixXd centers, const SpectralConfig& cfg) {
    const Eigen::Index n = points.rows();
    const auto k = static_cast<Eigen::Index>(cfg.k);
    std::vector<std::size_t> labels(static_cast<std::size_t>(n), 0);
    std::vector<std::size_t> counts(cfg.k, 0);
    KMeansRestart out;
    double previous = std::numeric_limits<double>::infinity();

    for (std::size_t iter = 0; iter < cfg.kmeans_max_iters; ++iter) {
        bool changed = false;
        std::fill(counts.begin(), counts.end(), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::Index best = 0;
            double best_d = squared_distance(points, i, centers, 0);
            for (Eigen::Index c = 1; c < k; ++c) {
                const double d = squared_distance(points, i, centers, c);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            auto& l = labels[static_cast<std::size_t>(i)];
            if (iter == 0 || l != static_cast<std::size_t>(best)) changed = true;
            l = static_cast<std::size_t>(best);
            ++counts[l];
        }

        // Reseed each empty cluster with the point farthest from its current
        // center, taken from a cluster that keeps at least one member.
        for (std::size_t c = 0; c < cfg.k; ++c) {
            if (counts[c] != 0) continue;
            Eigen::Index far = -1;
            double far_d = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto l = labels[static_cast<std::size_t>(i)];
                if (counts[l] < 2) continue;
                const double d = squared_distance(points, i, centers, static_cast<Eigen::Index>(l));
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            auto& l = labels[static_cast<std::size_t>(far)];
            --counts[l];
            l = c;
            counts[c] = 1;
            centers.row(static_cast<Eigen::Index>(c)) = points.row(far);
            ++out.repairs;
            changed = true;
        }

        centers.setZero();
        for (Eigen::Index i = 0; i < n; ++i) {
            centers.row(static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)])) += points.row(i);
        }
        for (Eigen::Index c = 0; c < k; ++c) centers.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);

        double cost = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            cost += squared_distance(points, i, centers, static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]));
        }
        out.cost_history.push_back(cost);
        const bool stalled = std::isfinite(previous) && previous - cost <= cfg.kmeans_tol * previous;
        previous = cost;
        if (!changed || stalled) break;
    }
    out.cost = previous;
    out.partition = Partition(cfg.k, std::move(labels));
    return out;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, const SpectralConfig& cfg) {
    cfg.validate();
    const auto n = static_cast<std::size_t>(points.rows());
    if (n < cfg.k) {
        throw usage_error("k-means needs at least k = " + std::to_string(cfg.k) + " points, got " + std::to_string(n));
    }
    if (!points.allFinite()) throw numerical_error("k-means input contains non-finite coordinates");

    KMeansResult result;
    for (std::size_t r = 0; r < cfg.kmeans_restarts; ++r) {
        Rng rng(derive_seed(cfg.rng_seed, r));
        result.restarts.push_back(lloyd(points, seed_plus_plus(points, cfg.k, rng), cfg));
        if (r == 0 || result.restarts[r].cost < result.cost) {
            result.cost = result.restarts[r].cost;
            result.best_restart = r;
        }
    }
    result.partition = result.restarts[result.best_restart].partition;
    return result;
}

std::vector<long> ClusterResult::labels_by_node(std::size_t node_count) const {
    std::vector<long> out(node_count, -1);
    for (std::size_t i = 0; i < kept_nodes.size(); ++i) out.at(kept_nodes[i]) = static_cast<long>(partition.label(i));
    return out;
}

ClusterResult cluster_graph(const AdjacencyMatrix& a, const SpectralConfig& cfg) {
    cfg.validate();
    ClusterResult out;
    const Eigen::VectorXd deg = degrees(a);
    for (std::size_t i = 0; i < a.size(); ++i) {
        (deg(static_cast<Eigen::Index>(i)) > 0.0 ? out.kept_nodes : out.dropped_nodes).push_back(i);
    }
    if (out.kept_nodes.size() < cfg.k) {
        throw numerical_error("only " + std::to_string(out.kept_nodes.size()) +
                              " nodes have nonzero degree, fewer than k = " + std::to_string(cfg.k));
    }

    const AdjacencyMatrix sub = a.induced(out.kept_nodes);
    SpectralEmbedding embedding = row_normalize(smallest_eigenvectors(normalized_laplacian(sub), cfg.k, cfg.eig_tol));
    KMeansResult km = kmeans(embedding.rows, cfg);

    out.partition = std::move(km.partition);
    out.kmeans_cost = km.cost;
    out.eigenvalues = std::move(embedding.eigenvalues);
    out.residuals = std::move(embedding.residuals);
    out.ncut = ncut(sub, out.partition);
    return out;
}

}  // namespace modnet
