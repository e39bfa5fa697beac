#pragma once

// Naive reference implementations used as independent oracles by the tests.
// They deliberately share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense random_graph(std::size_t n, double density, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Dense a(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (u(gen) < density) a[i][j] = a[j][i] = u(gen) * 3.0 + 0.01;
        }
    }
    return a;
}

inline double degree(const Dense& a, std::size_t i) {
    double d = 0.0;
    for (double v : a[i]) d += v;
    return d;
}

inline double volume(const Dense& a, const std::vector<std::size_t>& z) {
    double v = 0.0;
    for (auto i : z) v += degree(a, i);
    return v;
}

inline double cut(const Dense& a, const std::vector<std::size_t>& x, const std::vector<std::size_t>& y) {
    double w = 0.0;
    for (auto i : x)
        for (auto j : y) w += a[i][j];
    return w;
}

/// sum_c W(X_c, complement) / vol(X_c) via explicit member lists and double loops.
inline double ncut(const Dense& a, const std::vector<std::size_t>& labels, std::size_t k) {
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<std::size_t> in, out;
        for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == c ? in : out).push_back(i);
        total += cut(a, in, out) / volume(a, in);
    }
    return total;
}

/// Average ranks by counting: rank_i = #{x_j < x_i} + (#{x_j == x_i} + 1) / 2.
inline std::vector<double> ranks(const std::vector<double>& x) {
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double less = 0, equal = 0;
        for (double v : x) {
            less += v < x[i];
            equal += v == x[i];
        }
        r[i] = less + (equal + 1.0) / 2.0;
    }
    return r;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(ranks(x), ranks(y));
}

struct Planted {
    Dense a;
    std::vector<std::size_t> labels;
    std::size_t blocks = 0;
};

/// Planted partition: within-block edges (density p_in, weight w_in), cross-block
/// edges (density p_out, weight w_out). Each block also gets a ring so it is connected.
inline Planted planted_partition(const std::vector<std::size_t>& sizes, double p_in, double w_in, double p_out,
                                 double w_out, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Planted p;
    p.blocks = sizes.size();
    for (std::size_t b = 0; b < sizes.size(); ++b) p.labels.insert(p.labels.end(), sizes[b], b);
    const std::size_t n = p.labels.size();
    p.a.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool same = p.labels[i] == p.labels[j];
            if (u(gen) < (same ? p_in : p_out)) p.a[i][j] = p.a[j][i] = same ? w_in : w_out;
        }
    }
    std::size_t start = 0;
    for (auto s : sizes) {
        for (std::size_t t = 0; t < s && s > 1; ++t) {
            const auto i = start + t, j = start + (t + 1) % s;
            if (i != j) p.a[i][j] = p.a[j][i] = w_in;
        }
        start += s;
    }
    return p;
}

/// True when two labelings agree up to a relabeling of clusters.
inline bool same_partition(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a.size(); ++j) {
            if ((a[i] == a[j]) != (b[i] == b[j])) return false;
        }
    }
    return true;
}

}  // namespace oracle
