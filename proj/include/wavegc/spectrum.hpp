// SPDX-License-Identifier: Apache-2.0
//
// Dense spectral decomposition of the symmetric normalized Laplacian
// L = I - D^{-1/2} A D^{-1/2}, plus the commute-time distance computed from
// that spectrum:
//
//   tau(a,b) = 2|E| * sum_{lambda_n > 0} (1/lambda_n)
//              * (u_n(a)/sqrt(d_a) - u_n(b)/sqrt(d_b))^2
//
// Eigenvalues live in [0,2]; values within 1e-9 of a boundary are clamped to
// it so filters evaluated "at 0" or "at 2" behave like their analytic limits.

#pragma once

#include "wavegc/graph.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace wavegc {

inline constexpr double kEigClampTol = 1e-9;

struct Spectrum {
    Eigen::VectorXd eigenvalues;   // ascending, in [0,2]
    Eigen::MatrixXd eigenvectors;  // column i pairs with eigenvalues[i]
    int n() const { return static_cast<int>(eigenvalues.size()); }
};

/// Symmetric normalized adjacency D^{-1/2} A D^{-1/2} (dense).
inline Eigen::MatrixXd normalized_adjacency(const Graph& g) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.n, g.n);
    for (auto [u, v] : g.edges) {
        double w = 1.0 / std::sqrt(static_cast<double>(g.degrees[static_cast<std::size_t>(u)]) *
                                   static_cast<double>(g.degrees[static_cast<std::size_t>(v)]));
        a(u, v) = w;
        a(v, u) = w;
    }
    return a;
}

inline Eigen::MatrixXd normalized_laplacian(const Graph& g) {
    return Eigen::MatrixXd::Identity(g.n, g.n) - normalized_adjacency(g);
}

/// Mean-aggregation operator D^{-1} A (row-stochastic).
inline Eigen::MatrixXd mean_aggregation(const Graph& g) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.n, g.n);
    for (auto [u, v] : g.edges) {
        a(u, v) = 1.0 / static_cast<double>(g.degrees[static_cast<std::size_t>(u)]);
        a(v, u) = 1.0 / static_cast<double>(g.degrees[static_cast<std::size_t>(v)]);
    }
    return a;
}

/// Full eigendecomposition of the normalized Laplacian. Rejects graphs with
/// isolated nodes (D^{-1/2} undefined there).
inline Spectrum spectrum(const Graph& g) {
    for (int i = 0; i < g.n; ++i)
        if (g.degrees[static_cast<std::size_t>(i)] == 0)
            throw std::domain_error("spectrum: isolated node " + std::to_string(i));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(normalized_laplacian(g));
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("spectrum: eigendecomposition failed");
    Spectrum s;
    s.eigenvalues = solver.eigenvalues();
    s.eigenvectors = solver.eigenvectors();
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
        double& lam = s.eigenvalues(i);
        if (std::abs(lam) <= kEigClampTol) lam = 0.0;
        if (std::abs(lam - 2.0) <= kEigClampTol) lam = 2.0;
        if (lam < 0.0 || lam > 2.0)
            throw std::runtime_error("spectrum: eigenvalue out of [0,2]: " + std::to_string(lam));
    }
    return s;
}

/// Commute time between nodes a and b; the lambda=0 eigenspace contributes
/// nothing (its numerator vanishes identically) and is skipped.
inline double commute_time(const Spectrum& s, const std::vector<int>& degrees, int a, int b) {
    const int n = s.n();
    if (a < 0 || a >= n || b < 0 || b >= n)
        throw std::invalid_argument("commute_time: node out of range");
    if (static_cast<int>(degrees.size()) != n)
        throw std::invalid_argument("commute_time: degree vector size mismatch");
    int zero_modes = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        if (s.eigenvalues(i) <= kEigClampTol) ++zero_modes;
    if (zero_modes != 1)
        throw std::domain_error("commute_time: graph is disconnected (commute time infinite)");
    if (a == b) return 0.0;
    double two_e = 0.0;
    for (int d : degrees) two_e += d;
    const double inv_sqrt_da = 1.0 / std::sqrt(static_cast<double>(degrees[static_cast<std::size_t>(a)]));
    const double inv_sqrt_db = 1.0 / std::sqrt(static_cast<double>(degrees[static_cast<std::size_t>(b)]));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double lam = s.eigenvalues(i);
        if (lam <= kEigClampTol) continue;
        double diff = s.eigenvectors(a, i) * inv_sqrt_da - s.eigenvectors(b, i) * inv_sqrt_db;
        acc += diff * diff / lam;
    }
    return two_e * acc;
}

inline double commute_time(const Spectrum& s, const Graph& g, int a, int b) {
    return commute_time(s, g.degrees, a, b);
}

}  // namespace wavegc
