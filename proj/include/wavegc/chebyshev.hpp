// SPDX-License-Identifier: Apache-2.0
//
// Chebyshev machinery on the spectral interval [0,2].
//
// The basic building block is the order-shifted term
//
//     t_k(x) = (1 - T_k(x - 1)) / 2,
//
// which maps T_k from [-1,1] onto [0,2] and flips it so that even orders
// vanish at both endpoints (band-pass candidates) while odd orders equal 1
// at x=0 and 0 at x=2 (low-pass candidates). Order 0 transforms to the zero
// function and is excluded from both families: odd rows use orders
// 1,3,...,2*rho-1 and even rows use 2,4,...,2*rho.
//
// Spectral functions are also carried around as Chebyshev series
// sum_m c_m T_m(lambda - 1); applying such a series to a signal only needs
// repeated products with the shifted operator L - I = -A_hat, never an
// eigendecomposition.

#pragma once

#include "wavegc/graph.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace wavegc {

/// T_k(y) by the stable three-term recurrence; valid for any real y.
inline double chebyshev_t(int k, double y) {
    if (k < 0) throw std::invalid_argument("chebyshev_t: negative order");
    if (k == 0) return 1.0;
    if (k == 1) return y;
    double tm2 = 1.0, tm1 = y;
    for (int i = 2; i <= k; ++i) {
        double t = 2.0 * y * tm1 - tm2;
        tm2 = tm1;
        tm1 = t;
    }
    return tm1;
}

/// Second-kind U_k(y); T_k'(y) = k * U_{k-1}(y).
inline double chebyshev_u(int k, double y) {
    if (k < 0) return 0.0;
    if (k == 0) return 1.0;
    double um2 = 1.0, um1 = 2.0 * y;
    if (k == 1) return um1;
    for (int i = 2; i <= k; ++i) {
        double u = 2.0 * y * um1 - um2;
        um2 = um1;
        um1 = u;
    }
    return um1;
}

/// Shifted term t_k(x) = (1 - T_k(x-1))/2, no domain restriction. The scaled
/// wavelet path evaluates this beyond x=2 on purpose.
inline double shifted_term(int k, double x) { return 0.5 * (1.0 - chebyshev_t(k, x - 1.0)); }

/// d/dx of the shifted term: -T_k'(x-1)/2 = -k U_{k-1}(x-1)/2.
inline double shifted_term_derivative(int k, double x) {
    if (k == 0) return 0.0;
    return -0.5 * static_cast<double>(k) * chebyshev_u(k - 1, x - 1.0);
}

/// Shifted term restricted to the spectral interval [0,2] (1e-9 slack).
inline double transformed_term(int k, double lambda) {
    if (lambda < -1e-9 || lambda > 2.0 + 1e-9)
        throw std::domain_error("transformed_term: lambda outside [0,2]");
    return shifted_term(k, std::min(std::max(lambda, 0.0), 2.0));
}

enum class Parity { odd, even };

/// Chebyshev order of the i-th basis term (i = 1..rho).
inline int term_order(Parity parity, int i) { return parity == Parity::odd ? 2 * i - 1 : 2 * i; }

struct ChebBasisTable {
    Parity parity = Parity::odd;
    int rho = 0;
    Eigen::VectorXd lambdas;
    Eigen::MatrixXd values;  // rho x |grid|, row i-1 = term of order term_order(parity, i)
};

inline ChebBasisTable basis_table(Parity parity, int rho, const Eigen::VectorXd& lambdas) {
    if (rho < 1) throw std::invalid_argument("basis_table: rho must be >= 1");
    ChebBasisTable t;
    t.parity = parity;
    t.rho = rho;
    t.lambdas = lambdas;
    t.values.resize(rho, lambdas.size());
    for (int i = 1; i <= rho; ++i) {
        int k = term_order(parity, i);
        for (Eigen::Index j = 0; j < lambdas.size(); ++j)
            t.values(i - 1, j) = transformed_term(k, lambdas(j));
    }
    return t;
}

// ---------------------------------------------------------------------------
// Chebyshev series in T_m(lambda - 1)
// ---------------------------------------------------------------------------

struct ChebSeries {
    std::vector<double> coeffs;  // coeffs[m] multiplies T_m(lambda - 1)

    int degree() const { return coeffs.empty() ? 0 : static_cast<int>(coeffs.size()) - 1; }

    double eval(double lambda) const {
        double acc = 0.0;
        for (std::size_t m = 0; m < coeffs.size(); ++m)
            acc += coeffs[m] * chebyshev_t(static_cast<int>(m), lambda - 1.0);
        return acc;
    }
};

/// Product of two series via T_i T_j = (T_{i+j} + T_{|i-j|})/2.
inline ChebSeries cheb_mul(const ChebSeries& a, const ChebSeries& b) {
    ChebSeries c;
    if (a.coeffs.empty() || b.coeffs.empty()) return c;
    c.coeffs.assign(a.coeffs.size() + b.coeffs.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.coeffs.size(); ++i)
        for (std::size_t j = 0; j < b.coeffs.size(); ++j) {
            double half = 0.5 * a.coeffs[i] * b.coeffs[j];
            c.coeffs[i + j] += half;
            c.coeffs[i >= j ? i - j : j - i] += half;
        }
    return c;
}

inline ChebSeries cheb_truncate(ChebSeries s, int max_degree) {
    if (max_degree < 0) max_degree = 0;
    if (s.degree() > max_degree) s.coeffs.resize(static_cast<std::size_t>(max_degree) + 1);
    return s;
}

/// Exact Chebyshev expansion of f on [0,2] up to `degree` via interpolation
/// at degree+1 Chebyshev nodes (exact when f is a polynomial of that degree).
inline ChebSeries cheb_interpolate(const std::function<double(double)>& f, int degree) {
    const int m = degree + 1;
    std::vector<double> fx(static_cast<std::size_t>(m));
    for (int t = 0; t < m; ++t) {
        double theta = M_PI * (t + 0.5) / m;
        fx[static_cast<std::size_t>(t)] = f(std::cos(theta) + 1.0);
    }
    ChebSeries s;
    s.coeffs.assign(static_cast<std::size_t>(m), 0.0);
    for (int k = 0; k < m; ++k) {
        double acc = 0.0;
        for (int t = 0; t < m; ++t) acc += fx[static_cast<std::size_t>(t)] * std::cos(M_PI * k * (t + 0.5) / m);
        s.coeffs[static_cast<std::size_t>(k)] = (k == 0 ? 1.0 : 2.0) * acc / m;
    }
    return s;
}

/// Series for the odd-term combination h(lambda) = sum_k b_k t_{2k-1}(lambda).
inline ChebSeries series_odd_combination(const std::vector<double>& b) {
    ChebSeries s;
    if (b.empty()) return s;
    int max_order = term_order(Parity::odd, static_cast<int>(b.size()));
    s.coeffs.assign(static_cast<std::size_t>(max_order) + 1, 0.0);
    for (std::size_t i = 0; i < b.size(); ++i) {
        s.coeffs[0] += 0.5 * b[i];
        s.coeffs[static_cast<std::size_t>(term_order(Parity::odd, static_cast<int>(i) + 1))] -= 0.5 * b[i];
    }
    return s;
}

/// Series (in lambda) for the scaled even combination g(s*lambda); exact,
/// obtained by re-expanding the degree-2*rho polynomial.
inline ChebSeries series_even_combination_scaled(const std::vector<double>& a, double s) {
    if (a.empty()) return ChebSeries{};
    int deg = term_order(Parity::even, static_cast<int>(a.size()));
    auto f = [&](double lambda) {
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            acc += a[i] * shifted_term(term_order(Parity::even, static_cast<int>(i) + 1), s * lambda);
        return acc;
    };
    return cheb_interpolate(f, deg);
}

// ---------------------------------------------------------------------------
// Operator application without eigendecomposition
// ---------------------------------------------------------------------------

/// Edge-sweep product Y = A_hat * X, O(|E| * d).
inline Eigen::MatrixXd normalized_adjacency_apply(const Graph& g, const Eigen::MatrixXd& x) {
    if (x.rows() != g.n)
        throw std::invalid_argument("normalized_adjacency_apply: signal rows != node count");
    std::vector<double> inv_sqrt_deg(static_cast<std::size_t>(g.n));
    for (int i = 0; i < g.n; ++i) {
        if (g.degrees[static_cast<std::size_t>(i)] == 0)
            throw std::domain_error("normalized_adjacency_apply: isolated node " + std::to_string(i));
        inv_sqrt_deg[static_cast<std::size_t>(i)] =
            1.0 / std::sqrt(static_cast<double>(g.degrees[static_cast<std::size_t>(i)]));
    }
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(x.rows(), x.cols());
    for (auto [u, v] : g.edges) {
        double w = inv_sqrt_deg[static_cast<std::size_t>(u)] * inv_sqrt_deg[static_cast<std::size_t>(v)];
        y.row(u) += w * x.row(v);
        y.row(v) += w * x.row(u);
    }
    return y;
}

/// Applies sum_m c_m T_m(L - I) to X through the matrix recurrence on
/// (L - I) = -A_hat. If `op_count` is given it receives the number of
/// operator products performed (= series degree).
inline Eigen::MatrixXd apply_cheb_series(const ChebSeries& s, const Graph& g,
                                         const Eigen::MatrixXd& x,
                                         std::size_t* op_count = nullptr) {
    if (x.rows() != g.n) throw std::invalid_argument("apply_cheb_series: signal rows != node count");
    std::size_t ops = 0;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(x.rows(), x.cols());
    if (s.coeffs.empty()) {
        if (op_count) *op_count = 0;
        return acc;
    }
    Eigen::MatrixXd tm2 = x;  // T_0 X
    acc += s.coeffs[0] * tm2;
    if (s.coeffs.size() > 1) {
        Eigen::MatrixXd tm1 = -normalized_adjacency_apply(g, x);  // T_1 X = (L - I) X
        ++ops;
        acc += s.coeffs[1] * tm1;
        for (std::size_t m = 2; m < s.coeffs.size(); ++m) {
            Eigen::MatrixXd t = -2.0 * normalized_adjacency_apply(g, tm1) - tm2;
            ++ops;
            tm2 = std::move(tm1);
            tm1 = std::move(t);
            acc += s.coeffs[m] * tm1;
        }
    }
    if (op_count) *op_count = ops;
    return acc;
}

/// Applies sum_i coeffs[i] * t_{order(parity,i+1)}(L) to X. Equivalent to the
/// spectral evaluation U diag(sum_i c_i t_i(Lambda)) U^T X but computed with
/// O(rho * |E| * d) operator products.
inline Eigen::MatrixXd apply_poly_operator(Parity parity, const std::vector<double>& coeffs,
                                           const Graph& g, const Eigen::MatrixXd& x,
                                           std::size_t* op_count = nullptr) {
    if (coeffs.empty()) throw std::invalid_argument("apply_poly_operator: empty coefficients");
    ChebSeries s;
    int max_order = term_order(parity, static_cast<int>(coeffs.size()));
    s.coeffs.assign(static_cast<std::size_t>(max_order) + 1, 0.0);
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        s.coeffs[0] += 0.5 * coeffs[i];
        s.coeffs[static_cast<std::size_t>(term_order(parity, static_cast<int>(i) + 1))] -= 0.5 * coeffs[i];
    }
    return apply_cheb_series(s, g, x, op_count);
}

}  // namespace wavegc
