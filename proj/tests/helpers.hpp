// SPDX-License-Identifier: Apache-2.0
//
// Shared test utilities: seeded random graphs/matrices and the independent
// effective-resistance oracle (combinatorial-Laplacian pseudoinverse) used to
// cross-check the spectral commute-time formula. Oracles here must stay
// independent of the library paths they check.

#pragma once

#include "wavegc/graph.hpp"

#include <Eigen/Dense>

#include <random>

namespace testutil {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                                     double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    return m;
}

/// Connected Erdos-Renyi-style graph: random spanning tree + extra edges.
/// With make_odd_cycle an extra chord guarantees the graph is not bipartite,
/// which keeps the top eigenvalue strictly below 2.
inline wavegc::Graph random_connected_graph(std::mt19937_64& rng, int n, double extra_p = 0.3,
                                            bool make_odd_cycle = false) {
    std::vector<std::pair<int, int>> edges;
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 1; i < n; ++i) {
        int j = perm[static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(i))];
        edges.emplace_back(perm[static_cast<std::size_t>(i)], j);
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (unif(rng) < extra_p) edges.emplace_back(i, j);
    if (make_odd_cycle && n >= 3) {
        edges.emplace_back(perm[0], perm[1]);
        edges.emplace_back(perm[1], perm[2]);
        edges.emplace_back(perm[0], perm[2]);
    }
    return wavegc::make_graph(n, edges);
}

/// 2|E| * effective resistance from the pseudoinverse of D - A.
inline double commute_time_oracle(const wavegc::Graph& g, int a, int b) {
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(g.n, g.n);
    for (auto [u, v] : g.edges) {
        lap(u, u) += 1.0;
        lap(v, v) += 1.0;
        lap(u, v) -= 1.0;
        lap(v, u) -= 1.0;
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(lap);
    Eigen::MatrixXd pinv = cod.pseudoInverse();
    double r_eff = pinv(a, a) + pinv(b, b) - 2.0 * pinv(a, b);
    return 2.0 * static_cast<double>(g.edge_count()) * r_eff;
}

}  // namespace testutil
