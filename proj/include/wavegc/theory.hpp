// SPDX-License-Identifier: Apache-2.0
//
// Numerical verification of the mixing theory.
//
// A MixingProbe is the stripped model the analysis speaks about: a stack of
// sigma(Psi_s H W_l) layers followed by a readout of H theta. Its maximal
// mixing between two nodes' features,
//
//   mix(a,b) = max_X max_{alpha,beta} | d^2 y / d x_a^alpha d x_b^beta |,
//
// is measured from below by central second differences over a grid of random
// inputs, and compared against the entrywise bound
//
//   mix(a,b) <= sum_{l=0}^{m-1} ( (B^{m-l})^T diag(1^T B^l) B^{m-l} )_{ab}
//
// valid when |sigma'|, |sigma''| <= 1 and ||W_l|| <= 1, with B either the
// smooth-filter envelope alpha * A_hat^{K/2} * s^K (filter C lambda^K / K!)
// or the exact surrogate |Psi_s|. The depth report evaluates the
// commute-time lower bound on the number of layers, and the receptive field
// of an operator row is everything above a fraction of the global max entry.

#pragma once

#include "wavegc/spectrum.hpp"
#include "wavegc/wavelet_bank.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace wavegc {

struct VerifyReport {
    std::string name;
    double measured = 0.0;
    double bound = 0.0;
    bool pass = false;
    nlohmann::json context;

    nlohmann::json to_json() const {
        return nlohmann::json{{"name", name},
                              {"measured", measured},
                              {"bound", bound},
                              {"pass", pass},
                              {"context", context}};
    }
};

// ---------------------------------------------------------------------------
// Probe model
// ---------------------------------------------------------------------------

enum class ProbeActivation { identity, tanh_, quad };

inline double probe_act(ProbeActivation a, double t) {
    switch (a) {
        case ProbeActivation::identity: return t;
        case ProbeActivation::tanh_: return std::tanh(t);
        case ProbeActivation::quad: return 0.5 * t * t;
    }
    return t;
}

/// Declared |sigma'|,|sigma''| ceiling; quad has unbounded slope and is only
/// usable for closed-form Hessian oracles, not for bound checks.
inline double probe_c_sigma(ProbeActivation a) {
    switch (a) {
        case ProbeActivation::identity: return 1.0;
        case ProbeActivation::tanh_: return 1.0;
        case ProbeActivation::quad: return std::numeric_limits<double>::infinity();
    }
    return 1.0;
}

enum class Readout { sum, mean, max };

inline double operator_norm(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

struct MixingProbe {
    Graph graph;
    Eigen::MatrixXd psi;                  // single wavelet operator
    std::vector<Eigen::MatrixXd> weights; // one d x d weight per layer
    Eigen::VectorXd theta;                // readout weight, ||theta|| <= 1
    ProbeActivation activation = ProbeActivation::tanh_;
    Readout readout = Readout::sum;
    double declared_w = 1.0;              // claimed operator-norm cap for every W_l
    // lemma filter model context (set when psi was built as C lambda^K / K!)
    int lemma_k = 0;
    double lemma_c = 1.0;
    double scale = 1.0;

    int depth() const { return static_cast<int>(weights.size()); }
    int dim() const { return weights.empty() ? 0 : static_cast<int>(weights[0].rows()); }
};

inline void validate_probe(const MixingProbe& p) {
    if (p.weights.empty()) throw std::invalid_argument("probe: needs at least one layer");
    for (const auto& w : p.weights)
        if (operator_norm(w) > p.declared_w + 1e-9)
            throw std::invalid_argument("probe: weight operator norm exceeds declared bound");
    if (p.theta.norm() > 1.0 + 1e-9)
        throw std::invalid_argument("probe: readout norm must be <= 1");
    if (p.psi.rows() != p.graph.n || p.psi.cols() != p.graph.n)
        throw std::invalid_argument("probe: operator size mismatch");
}

/// y_G(X) = readout( H^{(m)} theta ), H^{(l)} = sigma(Psi H^{(l-1)} W_l).
inline double probe_forward(const MixingProbe& p, const Eigen::MatrixXd& x) {
    Eigen::MatrixXd h = x;
    for (const auto& w : p.weights) {
        h = (p.psi * h * w)
                .unaryExpr([&](double t) { return probe_act(p.activation, t); });
    }
    Eigen::VectorXd per_node = h * p.theta;
    switch (p.readout) {
        case Readout::sum: return per_node.sum();
        case Readout::mean: return per_node.mean();
        case Readout::max: return per_node.maxCoeff();
    }
    return per_node.sum();
}

/// One mixed second derivative at X0 by the four-point central formula
/// (step 1e-4). Handles the coincident-entry case (a,alpha) == (b,beta).
inline double mixing_hessian(const MixingProbe& p, const Eigen::MatrixXd& x0, int a, int b,
                             int alpha, int beta, double step = 1e-4) {
    if (p.graph.n > 30) throw std::invalid_argument("mixing_hessian: capped at n=30");
    if (a < 0 || a >= p.graph.n || b < 0 || b >= p.graph.n)
        throw std::invalid_argument("mixing_hessian: node out of range");
    auto eval = [&](double da, double db) {
        Eigen::MatrixXd x = x0;
        x(a, alpha) += da;
        x(b, beta) += db;
        double y = probe_forward(p, x);
        if (!std::isfinite(y)) throw std::runtime_error("mixing_hessian: non-finite model output");
        return y;
    };
    return (eval(step, step) - eval(step, -step) - eval(-step, step) + eval(-step, -step)) /
           (4.0 * step * step);
}

/// Under-approximation of mix(a,b): max |mixed second difference| over all
/// feature pairs and a fixed grid of random standard-normal inputs.
inline double measure_mixing(const MixingProbe& p, int a, int b, int num_draws = 5,
                             std::uint64_t seed = 0) {
    validate_probe(p);
    const int d = p.dim();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double best = 0.0;
    for (int t = 0; t < num_draws; ++t) {
        Eigen::MatrixXd x0(p.graph.n, d);
        for (Eigen::Index i = 0; i < x0.rows(); ++i)
            for (Eigen::Index j = 0; j < x0.cols(); ++j) x0(i, j) = normal(rng);
        for (int alpha = 0; alpha < d; ++alpha)
            for (int beta = 0; beta < d; ++beta)
                best = std::max(best, std::abs(mixing_hessian(p, x0, a, b, alpha, beta)));
    }
    return best;
}

// ---------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------

inline double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

/// alpha = C * 2^K * (K+1) / K!
inline double lemma_alpha(int k, double c) {
    return c * std::pow(2.0, k) * (k + 1) / factorial(k);
}

/// Spectral operator for the lemma's filter model g(lambda) = C lambda^K / K!.
inline Eigen::MatrixXd lemma_filter_operator(const Spectrum& spec, int k, double c, double s) {
    Eigen::VectorXd f(spec.n());
    for (int i = 0; i < spec.n(); ++i)
        f(i) = c * std::pow(s * spec.eigenvalues(i), k) / factorial(k);
    return spec.eigenvectors * f.asDiagonal() * spec.eigenvectors.transpose();
}

/// Entrywise check (Psi_s)_{ij} < (alpha A_hat^{K/2} s^K)_{ij} wherever the
/// right side is strictly positive; measured value is the worst ratio.
inline VerifyReport entry_bound_check(const Graph& g, int k, double c, double s) {
    if (k < 2 || k % 2 != 0) throw std::invalid_argument("entry_bound_check: K must be even, >= 2");
    Spectrum spec = spectrum(g);
    Eigen::MatrixXd psi = lemma_filter_operator(spec, k, c, s);
    Eigen::MatrixXd ahat = normalized_adjacency(g);
    Eigen::MatrixXd ahat_pow = Eigen::MatrixXd::Identity(g.n, g.n);
    for (int p = 0; p < k / 2; ++p) ahat_pow = ahat_pow * ahat;
    Eigen::MatrixXd rhs = lemma_alpha(k, c) * std::pow(s, k) * ahat_pow;
    double worst_ratio = 0.0;
    int checked = 0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            if (rhs(i, j) <= 0.0) continue;
            ++checked;
            worst_ratio = std::max(worst_ratio, psi(i, j) / rhs(i, j));
        }
    VerifyReport r;
    r.name = "entry_bound";
    r.measured = worst_ratio;
    r.bound = 1.0;
    r.pass = worst_ratio < 1.0;
    r.context = {{"K", k}, {"C", c}, {"s", s}, {"n", g.n}, {"entries_checked", checked}};
    return r;
}

enum class BoundChoice { lemma, exact };

/// Depth-m mixing bound sum_{l} ((B^{m-l})^T diag(1^T B^l) B^{m-l})_{ab}.
inline double mixing_bound_value(const Eigen::MatrixXd& bmat, int depth, int a, int b) {
    const int n = static_cast<int>(bmat.rows());
    std::vector<Eigen::MatrixXd> powers(static_cast<std::size_t>(depth) + 1);
    powers[0] = Eigen::MatrixXd::Identity(n, n);
    for (int l = 1; l <= depth; ++l) powers[static_cast<std::size_t>(l)] = powers[static_cast<std::size_t>(l - 1)] * bmat;
    double acc = 0.0;
    for (int l = 0; l < depth; ++l) {
        const Eigen::MatrixXd& bl = powers[static_cast<std::size_t>(l)];
        const Eigen::MatrixXd& bml = powers[static_cast<std::size_t>(depth - l)];
        Eigen::VectorXd colsum = bl.colwise().sum().transpose();  // 1^T B^l
        acc += (bml.transpose() * colsum.asDiagonal() * bml)(a, b);
    }
    return acc;
}

/// Measured finite-difference mixing against the layered entrywise bound.
/// Probes violating the c_sigma <= 1 or w <= 1 assumptions are rejected
/// outright.
inline VerifyReport mixing_bound_check(const MixingProbe& p, int a, int b, BoundChoice choice,
                                       int num_draws = 5, std::uint64_t seed = 0) {
    validate_probe(p);
    if (probe_c_sigma(p.activation) > 1.0)
        throw std::invalid_argument("mixing_bound_check: activation violates c_sigma <= 1");
    if (p.declared_w > 1.0)
        throw std::invalid_argument("mixing_bound_check: weight norm bound violates w <= 1");
    Eigen::MatrixXd bmat;
    if (choice == BoundChoice::exact) {
        bmat = p.psi.cwiseAbs();
    } else {
        Eigen::MatrixXd ahat = normalized_adjacency(p.graph);
        Eigen::MatrixXd pow = Eigen::MatrixXd::Identity(p.graph.n, p.graph.n);
        for (int i = 0; i < p.lemma_k / 2; ++i) pow = pow * ahat;
        bmat = lemma_alpha(p.lemma_k, p.lemma_c) * std::pow(p.scale, p.lemma_k) * pow;
    }
    double measured = measure_mixing(p, a, b, num_draws, seed);
    double bound = mixing_bound_value(bmat, p.depth(), a, b);
    VerifyReport r;
    r.name = choice == BoundChoice::exact ? "mixing_bound_exact" : "mixing_bound_lemma";
    r.measured = measured;
    r.bound = bound;
    r.pass = measured <= bound + 1e-8;
    r.context = {{"depth", p.depth()}, {"a", a}, {"b", b}, {"n", p.graph.n},
                 {"draws", num_draws}};
    return r;
}

// ---------------------------------------------------------------------------
// Depth lower bound and receptive fields
// ---------------------------------------------------------------------------

/// Comparison-model constants for the K-hop baseline sum_j tau_j A^j H W:
/// P is the hop with the largest contribution and tau_p its coefficient.
/// They are inputs, not inferred; when given, the report's context carries
/// the baseline's own least depth evaluated with B = (K+1) tau_p A_hat^P.
struct ComparisonModel {
    int p = 1;
    double tau_p = 1.0;
};

/// Smallest depth m in [1, m_max] satisfying the commute-time lower bound
///
///   m >= tau(a,b)/(2K) + (2|E|/(K sqrt(d_a d_b))) *
///        [ mix / (gamma (alpha^2 s^{2K})^m) - (gamma + |1-l*|^{Km+1})/lambda_1 ]
///
/// The inequality is implicit in m; m_max+1 is reported when no candidate
/// satisfies it. Bipartite graphs have |1-lambda*| = 1 and are rejected.
inline VerifyReport depth_bound_report(const Graph& g, double s, int k, double target_mix, int a,
                                       int b, double c = 1.0, int m_max = 64,
                                       std::optional<ComparisonModel> comparison = std::nullopt) {
    if (!g.connected()) throw std::domain_error("depth_bound_report: graph must be connected");
    if (k < 2 || k % 2 != 0) throw std::invalid_argument("depth_bound_report: K must be even, >= 2");
    Spectrum spec = spectrum(g);
    const int n = g.n;
    double lambda1 = 0.0;
    for (int i = 0; i < n; ++i)
        if (spec.eigenvalues(i) > kEigClampTol) { lambda1 = spec.eigenvalues(i); break; }
    double one_minus_lstar = 0.0;
    for (int i = 1; i < n; ++i)
        one_minus_lstar = std::max(one_minus_lstar, std::abs(1.0 - spec.eigenvalues(i)));
    if (one_minus_lstar >= 1.0 - 1e-12)
        throw std::domain_error(
            "depth_bound_report: |1-lambda*| = 1 (bipartite graph); the bound's strict "
            "inequality fails");
    const double tau = commute_time(spec, g, a, b);
    const double edges = static_cast<double>(g.edge_count());
    const double gamma = std::sqrt(static_cast<double>(g.max_degree()) /
                                   static_cast<double>(g.min_degree()));
    const double alpha = lemma_alpha(k, c);
    const double sqrt_dd = std::sqrt(static_cast<double>(g.degrees[static_cast<std::size_t>(a)]) *
                                     static_cast<double>(g.degrees[static_cast<std::size_t>(b)]));
    int found = m_max + 1;
    double rhs_at_found = 0.0;
    for (int m = 1; m <= m_max; ++m) {
        double decay = std::pow(alpha * alpha * std::pow(s, 2.0 * k), static_cast<double>(m));
        double rhs = tau / (2.0 * k) +
                     (2.0 * edges / (k * sqrt_dd)) *
                         (target_mix / (gamma * decay) -
                          (gamma + std::pow(one_minus_lstar, k * m + 1.0)) / lambda1);
        if (static_cast<double>(m) >= rhs) {
            found = m;
            rhs_at_found = rhs;
            break;
        }
    }
    VerifyReport r;
    r.name = "depth_bound";
    r.measured = static_cast<double>(found);
    r.bound = static_cast<double>(m_max + 1);
    r.pass = found <= m_max + 1;
    r.context = {{"s", s},        {"K", k},         {"C", c},
                 {"target_mix", target_mix},        {"tau", tau},
                 {"lambda1", lambda1},              {"one_minus_lambda_star", one_minus_lstar},
                 {"gamma", gamma}, {"rhs_at_m", rhs_at_found}, {"m_max", m_max},
                 {"a", a},        {"b", b}};
    if (comparison) {
        // baseline least depth with {alpha s^K, m, K} -> {sqrt((K+1) tau_p), 2m, P}
        const double kp = static_cast<double>(comparison->p);
        const double base = (k + 1.0) * (k + 1.0) * comparison->tau_p * comparison->tau_p;
        int found_a = m_max + 1;
        for (int m = 1; m <= m_max; ++m) {
            double decay = std::pow(base, static_cast<double>(m));
            double rhs = tau / (2.0 * kp) +
                         (2.0 * edges / (kp * sqrt_dd)) *
                             (target_mix / (gamma * decay) -
                              (gamma + std::pow(one_minus_lstar, 2.0 * kp * m + 1.0)) / lambda1);
            if (static_cast<double>(m) >= rhs) {
                found_a = m;
                break;
            }
        }
        r.context["comparison_P"] = comparison->p;
        r.context["comparison_tau_p"] = comparison->tau_p;
        r.context["comparison_least_depth"] = found_a;
    }
    return r;
}

/// Nodes j with |psi(i,j)| above threshold_frac of the operator's global max.
inline std::vector<int> receptive_field(const Eigen::MatrixXd& psi, int i,
                                        double threshold_frac = 0.1) {
    if (!(threshold_frac > 0.0 && threshold_frac <= 1.0))
        throw std::invalid_argument("receptive_field: threshold_frac must be in (0,1]");
    if (i < 0 || i >= psi.rows()) throw std::invalid_argument("receptive_field: node out of range");
    const double cutoff = threshold_frac * psi.cwiseAbs().maxCoeff();
    std::vector<int> members;
    for (Eigen::Index j = 0; j < psi.cols(); ++j)
        if (std::abs(psi(i, j)) > cutoff) members.push_back(static_cast<int>(j));
    return members;
}

}  // namespace wavegc
